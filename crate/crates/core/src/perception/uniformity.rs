use serde::{Deserialize, Serialize};

use super::{PerceptionError, Result};
use crate::sim::{mean_torque, quick_stir_trial, BatterTruth, SurrogateParams, TorqueSensor};

/// Per-trial mean push torques and the change threshold `θ_u`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniformityMonitor {
    trial_torques: Vec<f64>,
    threshold: f64,
}

impl UniformityMonitor {
    pub fn new(threshold: f64) -> Result<Self> {
        if !(threshold > 0.0) || !threshold.is_finite() {
            return Err(PerceptionError::InvalidThreshold(threshold));
        }
        Ok(Self {
            trial_torques: Vec::new(),
            threshold,
        })
    }

    pub fn with_torques(threshold: f64, torques: &[f64]) -> Result<Self> {
        let mut m = Self::new(threshold)?;
        m.trial_torques.extend_from_slice(torques);
        Ok(m)
    }

    pub fn record(&mut self, torque: f64) {
        self.trial_torques.push(torque);
    }

    pub fn trial_torques(&self) -> &[f64] {
        &self.trial_torques
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }
}

/// True once the latest two trials differ by less than the threshold.
pub fn is_uniform(monitor: &UniformityMonitor) -> Result<bool> {
    match monitor.trial_torques[..] {
        [.., a, b] => Ok((b - a).abs() < monitor.threshold),
        ref t => Err(PerceptionError::InsufficientHistory(t.len())),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct UniformityConfig {
    /// Whisk tip height for the per-trial push, m. Capped at half the level.
    pub push_height: f64,
    /// Pushes averaged into one trial torque.
    pub pushes_per_trial: usize,
    /// `θ_u` as a fraction of the first trial's torque.
    pub threshold_frac: f64,
    pub max_trials: usize,
}

impl Default for UniformityConfig {
    fn default() -> Self {
        Self {
            push_height: 0.002,
            pushes_per_trial: 32,
            threshold_frac: 0.05,
            max_trials: 50,
        }
    }
}

impl UniformityConfig {
    fn push_height_for(&self, truth: &BatterTruth) -> f64 {
        self.push_height.min(0.5 * truth.level)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StirOutcome {
    /// 1-based index of the trial that declared the batter uniform.
    pub stop_trial: usize,
    pub monitor: UniformityMonitor,
    /// Batter state after the last trial.
    pub truth: BatterTruth,
}

/// Repeats quick-stir trials, each followed by an averaged push, until two
/// successive trial torques differ by less than `threshold_frac` of the first.
pub fn stir_to_uniformity(
    truth: &BatterTruth,
    params: &SurrogateParams,
    config: &UniformityConfig,
    sensor: &mut TorqueSensor,
) -> Result<StirOutcome> {
    let height = config.push_height_for(truth);
    let mut state = *truth;
    let mut monitor: Option<UniformityMonitor> = None;
    for k in 1..=config.max_trials {
        state = quick_stir_trial(&state);
        let t = sensor.averaged_push(&state, params, height, config.pushes_per_trial);
        let m = match monitor.as_mut() {
            Some(m) => m,
            None => {
                if !(t > 0.0) {
                    return Err(PerceptionError::NoBatterDetected);
                }
                monitor.insert(UniformityMonitor::new(config.threshold_frac * t)?)
            }
        };
        m.record(t);
        if k >= 2 && is_uniform(m)? {
            return Ok(StirOutcome {
                stop_trial: k,
                monitor: monitor.expect("set on first trial"),
                truth: state,
            });
        }
    }
    Err(PerceptionError::NotUniform(config.max_trials))
}

/// Brute-force stop trial on the noise-free decay curve, for the same
/// starting state and config as [`stir_to_uniformity`].
pub fn ground_truth_stop_trial(
    truth: &BatterTruth,
    params: &SurrogateParams,
    config: &UniformityConfig,
) -> Result<usize> {
    let height = config.push_height_for(truth);
    let mut state = *truth;
    let mut torques = Vec::new();
    for k in 1..=config.max_trials {
        state = quick_stir_trial(&state);
        torques.push(mean_torque(&state, params, height));
        if k >= 2 && (torques[k - 1] - torques[k - 2]).abs() < config.threshold_frac * torques[0] {
            return Ok(k);
        }
    }
    Err(PerceptionError::NotUniform(config.max_trials))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{run_preliminary, BowlSpec};

    #[test]
    fn large_change_is_not_uniform() {
        let m = UniformityMonitor::with_torques(0.05, &[0.9, 0.5]).unwrap();
        assert!(!is_uniform(&m).unwrap());
    }

    #[test]
    fn zero_change_is_uniform() {
        let m = UniformityMonitor::with_torques(1e-9, &[0.5, 0.5]).unwrap();
        assert!(is_uniform(&m).unwrap());
    }

    #[test]
    fn short_history_rejected() {
        let m = UniformityMonitor::with_torques(0.1, &[0.5]).unwrap();
        assert_eq!(is_uniform(&m), Err(PerceptionError::InsufficientHistory(1)));
        assert!(UniformityMonitor::new(0.0).is_err());
    }

    #[test]
    fn noisy_stop_near_ground_truth() {
        let p = SurrogateParams::default();
        let cfg = UniformityConfig::default();
        let t = run_preliminary(&BatterTruth::new(1.3, 0.03, BowlSpec::small()).unwrap());
        let gt = ground_truth_stop_trial(&t, &p, &cfg).unwrap();
        assert_eq!(gt, 3);
        for seed in 0..5 {
            let out = stir_to_uniformity(&t, &p, &cfg, &mut TorqueSensor::new(seed)).unwrap();
            assert!(out.stop_trial.abs_diff(gt) <= 1);
            assert_eq!(out.monitor.trial_torques().len(), out.stop_trial);
        }
    }
}
