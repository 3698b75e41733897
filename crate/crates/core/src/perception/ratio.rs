use serde::{Deserialize, Serialize};

use super::{PerceptionError, Result, TorqueCurve};

/// How the two best-matching labels are blended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightingMode {
    /// Each label weighted by the other label's MSE, so the closer curve dominates.
    #[default]
    InverseMse,
    /// `(M1 r1 + M2 r2) / (M1 + M2)` as written.
    PaperLiteral,
}

impl std::str::FromStr for WeightingMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "inverse_mse" => Ok(Self::InverseMse),
            "paper_literal" => Ok(Self::PaperLiteral),
            _ => Err(format!("unknown weighting mode `{s}` (inverse_mse|paper_literal)")),
        }
    }
}

/// One training batter: its label, push sweep and liquid level.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingBatch {
    pub ratio: f64,
    pub curve: TorqueCurve,
    pub level: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioEntry {
    pub ratio: f64,
    /// Torque per metre of immersion, N·m/m.
    pub slope: f64,
    /// Batter-side samples used in the fit.
    pub samples: usize,
    /// Residual MSE of the fit, (N·m)².
    pub fit_mse: f64,
}

/// Torque-vs-immersion lines through the origin, one per training ratio.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioModel {
    pub entries: Vec<RatioEntry>,
    #[serde(default)]
    pub weighting_mode: WeightingMode,
}

fn slope_through_origin(pairs: &[(f64, f64)]) -> f64 {
    let sxy: f64 = pairs.iter().map(|(d, t)| d * t).sum();
    let sxx: f64 = pairs.iter().map(|(d, _)| d * d).sum();
    sxy / sxx
}

fn mse(pairs: &[(f64, f64)], slope: f64) -> f64 {
    pairs.iter().map(|(d, t)| (slope * d - t).powi(2)).sum::<f64>() / pairs.len() as f64
}

fn batter_pairs(curve: &TorqueCurve, level: f64) -> Result<Vec<(f64, f64)>> {
    if !(level > 0.0) {
        return Err(PerceptionError::InvalidLevel(level));
    }
    let pairs = curve.immersion_pairs(level);
    if pairs.len() < 3 {
        return Err(PerceptionError::ProbeRangeTooCoarse);
    }
    Ok(pairs)
}

pub fn fit_ratio_model(training: &[TrainingBatch]) -> Result<RatioModel> {
    let mut entries = Vec::with_capacity(training.len());
    for batch in training {
        let pairs = batter_pairs(&batch.curve, batch.level)?;
        let slope = slope_through_origin(&pairs);
        if !(slope > 0.0) {
            return Err(PerceptionError::NonPositiveSlope(batch.ratio));
        }
        entries.push(RatioEntry {
            ratio: batch.ratio,
            slope,
            samples: pairs.len(),
            fit_mse: mse(&pairs, slope),
        });
    }
    entries.sort_by(|a, b| a.ratio.total_cmp(&b.ratio));
    if let Some(w) = entries.windows(2).find(|w| w[0].ratio == w[1].ratio) {
        return Err(PerceptionError::DuplicateLabel(w[0].ratio));
    }
    if entries.len() < 2 {
        return Err(PerceptionError::TooFewLabels(entries.len()));
    }
    let model = RatioModel {
        entries,
        weighting_mode: WeightingMode::default(),
    };
    if !model.slopes_decreasing() {
        log::warn!("ratio model slopes are not strictly decreasing in ratio");
    }
    Ok(model)
}

impl RatioModel {
    pub fn with_mode(mut self, mode: WeightingMode) -> Self {
        self.weighting_mode = mode;
        self
    }

    pub fn labels(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.ratio).collect()
    }

    pub fn slopes_decreasing(&self) -> bool {
        self.entries.windows(2).all(|w| w[1].slope < w[0].slope)
    }

    /// `(ratio, M_i)` for every entry, best match first. Ties keep label order.
    pub fn rank(&self, curve: &TorqueCurve, level: f64) -> Result<Vec<(f64, f64)>> {
        let pairs = batter_pairs(curve, level)?;
        let mut ranked: Vec<(f64, f64)> = self
            .entries
            .iter()
            .map(|e| (e.ratio, mse(&pairs, e.slope)))
            .collect();
        ranked.sort_by(|a, b| a.1.total_cmp(&b.1));
        Ok(ranked)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: Self = serde_json::from_str(text)
            .map_err(|e| PerceptionError::Format(format!("ratio model json: {e}")))?;
        if model.entries.len() < 2 {
            return Err(PerceptionError::TooFewLabels(model.entries.len()));
        }
        Ok(model)
    }
}

/// Blend of the two training labels whose curves best explain `curve`'s
/// batter-side samples below `level`.
pub fn estimate_ratio(curve: &TorqueCurve, level: f64, model: &RatioModel) -> Result<f64> {
    if model.entries.len() < 2 {
        return Err(PerceptionError::TooFewLabels(model.entries.len()));
    }
    let ranked = model.rank(curve, level)?;
    let (r1, m1) = ranked[0];
    let (r2, m2) = ranked[1];
    if m1 < 1e-12 {
        return Ok(r1);
    }
    Ok(match model.weighting_mode {
        WeightingMode::InverseMse => (m2 * r1 + m1 * r2) / (m1 + m2),
        WeightingMode::PaperLiteral => (m1 * r1 + m2 * r2) / (m1 + m2),
    })
}
