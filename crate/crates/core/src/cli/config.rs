use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::perception::{PerceptionConfig, WeightingMode};
use crate::sim::SurrogateParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LengthUnit {
    #[default]
    Mm,
    Cm,
    M,
}

impl LengthUnit {
    pub fn metres(self) -> f64 {
        match self {
            Self::Mm => 1e-3,
            Self::Cm => 1e-2,
            Self::M => 1.0,
        }
    }

    pub fn suffix(self) -> &'static str {
        match self {
            Self::Mm => "mm",
            Self::Cm => "cm",
            Self::M => "m",
        }
    }

    /// `value` metres in this unit, formatted with the suffix.
    pub fn show(self, value: f64) -> String {
        format!("{:.3} {}", value / self.metres(), self.suffix())
    }
}

/// Parses `10mm`, `1.5cm`, `0.02m`; a bare number is in `default`.
pub fn parse_length(text: &str, default: LengthUnit) -> Result<f64, String> {
    let t = text.trim();
    let (num, unit) = [("mm", LengthUnit::Mm), ("cm", LengthUnit::Cm), ("m", LengthUnit::M)]
        .into_iter()
        .find_map(|(s, u)| t.strip_suffix(s).map(|n| (n, u)))
        .unwrap_or((t, default));
    let v: f64 = num
        .trim()
        .parse()
        .map_err(|_| format!("cannot parse length `{text}` (e.g. 10mm, 1.5cm, 0.02m)"))?;
    if !v.is_finite() {
        return Err(format!("length `{text}` is not finite"));
    }
    Ok(v * unit.metres())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PathsConfig {
    pub dataset_dir: PathBuf,
    pub model_dir: PathBuf,
    pub output_dir: PathBuf,
}

impl Default for PathsConfig {
    fn default() -> Self {
        Self {
            dataset_dir: "data".into(),
            model_dir: "models".into(),
            output_dir: "out".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ThresholdConfig {
    /// Uniformity threshold as a fraction of the first trial torque.
    pub uniformity_frac: f64,
    /// Air/batter torque threshold, N·m. Unset means six times the air noise.
    pub jump: Option<f64>,
}

impl Default for ThresholdConfig {
    fn default() -> Self {
        Self {
            uniformity_frac: 0.05,
            jump: None,
        }
    }
}

/// Contents of the `--config` file. Every key is optional.
///
/// ```toml
/// seed = 0
/// units = "mm"
/// weighting_mode = "inverse_mse"
///
/// [surrogate]
/// sigma_air = 2e-5
///
/// [paths]
/// output_dir = "out"
///
/// [thresholds]
/// uniformity_frac = 0.05
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub seed: u64,
    /// Unit for bare lengths on the command line and for printed lengths.
    pub units: LengthUnit,
    pub weighting_mode: WeightingMode,
    pub surrogate: SurrogateParams,
    pub paths: PathsConfig,
    pub thresholds: ThresholdConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            units: LengthUnit::default(),
            weighting_mode: WeightingMode::default(),
            surrogate: SurrogateParams::default(),
            paths: PathsConfig::default(),
            thresholds: ThresholdConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, String> {
        let cfg: Self = toml::from_str(text).map_err(|e| format!("config: {e}"))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), String> {
        self.surrogate.validate().map_err(|e| format!("config [surrogate]: {e}"))?;
        let f = self.thresholds.uniformity_frac;
        if !(f > 0.0 && f < 1.0) {
            return Err(format!("config [thresholds]: uniformity_frac must be in (0, 1), got {f}"));
        }
        if let Some(j) = self.thresholds.jump {
            if !(j > 0.0 && j.is_finite()) {
                return Err(format!("config [thresholds]: jump must be positive, got {j}"));
            }
        }
        Ok(())
    }

    pub fn perception(&self) -> PerceptionConfig {
        let mut p = PerceptionConfig {
            jump_threshold: self.thresholds.jump,
            ..PerceptionConfig::default()
        };
        p.uniformity.threshold_frac = self.thresholds.uniformity_frac;
        p
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lengths() {
        assert!((parse_length("10mm", LengthUnit::M).unwrap() - 0.01).abs() < 1e-15);
        assert!((parse_length("1.5cm", LengthUnit::M).unwrap() - 0.015).abs() < 1e-15);
        assert_eq!(parse_length("0.02m", LengthUnit::Mm).unwrap(), 0.02);
        assert!((parse_length("30", LengthUnit::Mm).unwrap() - 0.03).abs() < 1e-15);
        assert!(parse_length("ten mm", LengthUnit::Mm).is_err());
    }

    #[test]
    fn empty_config_is_default() {
        assert_eq!(RunConfig::parse("").unwrap(), RunConfig::default());
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(RunConfig::parse("sed = 3").is_err());
        assert!(RunConfig::parse("[surrogate]\nkapa = 1.0").is_err());
        assert!(RunConfig::parse("[thresholds]\nuniformity_frac = 2.0").is_err());
    }

    #[test]
    fn round_trip() {
        let text = "seed = 7\nunits = \"cm\"\nweighting_mode = \"paper_literal\"\n[surrogate]\nalpha = 0.4\n[paths]\nmodel_dir = \"m\"\n[thresholds]\njump = 1e-4\n";
        let cfg = RunConfig::parse(text).unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.surrogate.alpha, 0.4);
        assert_eq!(RunConfig::parse(&cfg.to_toml()).unwrap(), cfg);
    }
}
