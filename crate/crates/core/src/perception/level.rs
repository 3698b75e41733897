use serde::{Deserialize, Serialize};

use super::{PerceptionError, Result, TorqueCurve};
use crate::sim::SurrogateParams;

/// `torque = slope * height + intercept`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Line {
    pub slope: f64,
    pub intercept: f64,
}

impl Line {
    /// Ordinary least squares. Needs at least two distinct abscissae.
    pub fn fit(points: &[(f64, f64)]) -> Self {
        let n = points.len() as f64;
        let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
        let my = points.iter().map(|p| p.1).sum::<f64>() / n;
        let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
        let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let slope = sxy / sxx;
        Self {
            slope,
            intercept: my - slope * mx,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.slope * x + self.intercept
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelEstimate {
    /// m
    pub level: f64,
    pub batter_line: Line,
    pub air_line: Line,
    /// Number of samples on the batter side; samples `split_index..` are air.
    pub split_index: usize,
}

/// Six times the air noise floor, with a tiny floor so noise-free curves
/// still have their zero readings classified as air.
pub fn default_jump_threshold(params: &SurrogateParams) -> f64 {
    (6.0 * params.sigma_air).max(1e-12)
}

const MAX_REFINEMENTS: usize = 20;

/// Liquid level from one push sweep: the height where a line fitted to the
/// sloped batter readings meets a line fitted to the flat air readings.
///
/// The air side starts as the longest suffix of readings with
/// `|torque| < jump_threshold` (a reading equal to the threshold counts as
/// batter). The split is then moved to the number of heights below the
/// current intersection and the lines refitted until it stops moving.
pub fn estimate_level(curve: &TorqueCurve, jump_threshold: f64) -> Result<LevelEstimate> {
    if !(jump_threshold > 0.0) {
        return Err(PerceptionError::InvalidThreshold(jump_threshold));
    }
    let s = curve.samples();
    let n = s.len();
    if n < 4 {
        return Err(PerceptionError::TooFewSamples { needed: 4, have: n });
    }
    let mut split = n;
    while split > 0 && s[split - 1].1.abs() < jump_threshold {
        split -= 1;
    }
    if split == 0 {
        return Err(PerceptionError::NoBatterDetected);
    }

    let mut estimate = None;
    for _ in 0..MAX_REFINEMENTS {
        if n - split < 2 {
            return Err(PerceptionError::ProbeRangeTooShallow);
        }
        if split < 3 {
            return Err(PerceptionError::ProbeRangeTooCoarse);
        }
        let e = fit_split(s, split);
        let next = s.iter().filter(|(h, _)| *h < e.level).count();
        estimate = Some(e);
        if next == split {
            break;
        }
        split = next;
    }
    let mut e = estimate.expect("at least one refinement");
    // a refinement cycle can leave the intersection outside its bracket
    let lo = s[e.split_index - 1].0;
    let hi = s[e.split_index].0;
    e.level = e.level.clamp(lo, hi);
    Ok(e)
}

fn fit_split(s: &[(f64, f64)], split: usize) -> LevelEstimate {
    let batter_line = Line::fit(&s[..split]);
    let air_line = Line::fit(&s[split..]);
    let dslope = batter_line.slope - air_line.slope;
    let level = if dslope.abs() < 1e-9 {
        s[split].0
    } else {
        (air_line.intercept - batter_line.intercept) / dslope
    };
    LevelEstimate {
        level,
        batter_line,
        air_line,
        split_index: split,
    }
}
