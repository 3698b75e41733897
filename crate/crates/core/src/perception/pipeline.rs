use serde::{Deserialize, Serialize};

use super::{
    estimate_level, estimate_ratio, stir_to_uniformity, LevelEstimate, PerceptionError,
    RatioModel, Result, StirOutcome, TorqueCurve, TrainingBatch, UniformityConfig,
};
use crate::sim::{run_preliminary, BatterTruth, BowlSpec, SurrogateParams, TorqueSensor};

/// 3 mm to 63 mm in 3 mm steps.
pub fn coarse_heights() -> Vec<f64> {
    (1..=21).map(|i| (3 * i) as f64 * 1e-3).collect()
}

/// 1 mm to 63 mm in 1 mm steps, used when the coarse sweep cannot place the level.
pub fn fine_heights() -> Vec<f64> {
    (1..=63).map(|i| i as f64 * 1e-3).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PerceptionConfig {
    pub uniformity: UniformityConfig,
    /// Air/batter split threshold, N·m. `None` means six times the air noise.
    pub jump_threshold: Option<f64>,
    /// Water mass of each training batter, kg.
    pub training_water_mass: f64,
}

impl Default for PerceptionConfig {
    fn default() -> Self {
        Self {
            uniformity: UniformityConfig::default(),
            jump_threshold: None,
            training_water_mass: 0.3,
        }
    }
}

impl PerceptionConfig {
    pub fn jump_threshold_for(&self, params: &SurrogateParams) -> f64 {
        self.jump_threshold
            .unwrap_or_else(|| super::default_jump_threshold(params))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerceptionOutcome {
    pub stir: StirOutcome,
    pub curve: TorqueCurve,
    pub level: LevelEstimate,
    pub ratio: Option<f64>,
    /// Whether the 1 mm re-sweep was needed.
    pub fine_sweep: bool,
}

/// Preliminary mixing, perceptive stirring to uniformity, then a push sweep
/// for the level and, given a model, the ratio.
pub fn perceive(
    truth: &BatterTruth,
    params: &SurrogateParams,
    config: &PerceptionConfig,
    model: Option<&RatioModel>,
    seed: u64,
) -> Result<PerceptionOutcome> {
    truth.validate()?;
    let mut sensor = TorqueSensor::new(seed);
    let mixed = run_preliminary(truth);
    let stir = stir_to_uniformity(&mixed, params, &config.uniformity, &mut sensor)?;
    let threshold = config.jump_threshold_for(params);

    let coarse = sensor.sweep(&stir.truth, params, &coarse_heights())?;
    let (curve, level, fine_sweep) = match estimate_level(&coarse, threshold) {
        Ok(level) => (coarse, level, false),
        Err(
            PerceptionError::ProbeRangeTooCoarse
            | PerceptionError::NoBatterDetected
            | PerceptionError::ProbeRangeTooShallow,
        ) => {
            log::debug!("coarse sweep failed, re-sweeping at 1 mm");
            let fine = sensor.sweep(&stir.truth, params, &fine_heights())?;
            let level = estimate_level(&fine, threshold)?;
            (fine, level, true)
        }
        Err(e) => return Err(e),
    };
    let ratio = model
        .map(|m| estimate_ratio(&curve, level.level, m))
        .transpose()?;
    Ok(PerceptionOutcome {
        stir,
        curve,
        level,
        ratio,
        fine_sweep,
    })
}

/// Training batter for `ratio`: the configured water mass plus matching flour
/// in the small bowl, perceived like any other batter.
pub fn collect_training_batch(
    ratio: f64,
    params: &SurrogateParams,
    config: &PerceptionConfig,
    seed: u64,
) -> Result<TrainingBatch> {
    let truth = BatterTruth::from_water(ratio, config.training_water_mass, BowlSpec::small())?;
    let out = perceive(&truth, params, config, None, seed)?;
    Ok(TrainingBatch {
        ratio,
        curve: out.curve,
        level: out.level.level,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn height_grids() {
        let c = coarse_heights();
        assert_eq!(c.len(), 21);
        assert!((c[0] - 0.003).abs() < 1e-15 && (c[20] - 0.063).abs() < 1e-15);
        assert_eq!(fine_heights().len(), 63);
    }

    #[test]
    fn shallow_batter_uses_fine_sweep() {
        let p = SurrogateParams::default();
        let t = BatterTruth::new(1.2, 0.006, BowlSpec::small()).unwrap();
        let out = perceive(&t, &p, &PerceptionConfig::default(), None, 4).unwrap();
        assert!(out.fine_sweep);
        assert!((out.level.level - 0.006).abs() / 0.006 < 0.15);
    }

    #[test]
    fn deterministic_per_seed() {
        let p = SurrogateParams::default();
        let t = BatterTruth::new(1.4, 0.033, BowlSpec::large()).unwrap();
        let a = perceive(&t, &p, &PerceptionConfig::default(), None, 9).unwrap();
        let b = perceive(&t, &p, &PerceptionConfig::default(), None, 9).unwrap();
        assert_eq!(a, b);
    }
}
