//! Haptic estimators: when to stop stirring, where the batter surface is, how
//! wet the batter is, and where the bowl sits.

mod circle;
mod curve;
mod level;
mod pipeline;
mod ratio;
mod uniformity;

pub use circle::{fit_circle, Circle};
pub use curve::TorqueCurve;
pub use level::{default_jump_threshold, estimate_level, Line, LevelEstimate};
pub use pipeline::{
    coarse_heights, collect_training_batch, fine_heights, perceive, PerceptionConfig,
    PerceptionOutcome,
};
pub use ratio::{estimate_ratio, fit_ratio_model, RatioEntry, RatioModel, TrainingBatch, WeightingMode};
pub use uniformity::{
    ground_truth_stop_trial, is_uniform, stir_to_uniformity, StirOutcome, UniformityConfig,
    UniformityMonitor,
};

use thiserror::Error;

use crate::sim::SimError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PerceptionError {
    #[error("no batter detected: every push reads as air")]
    NoBatterDetected,
    #[error("probe range too shallow: torque never flattens to the air floor")]
    ProbeRangeTooShallow,
    #[error("probe range too coarse: fewer than 3 pushes inside the batter")]
    ProbeRangeTooCoarse,
    #[error("uniformity check needs at least 2 trials, have {0}")]
    InsufficientHistory(usize),
    #[error("threshold must be positive, got {0}")]
    InvalidThreshold(f64),
    #[error("need at least {needed} samples, have {have}")]
    TooFewSamples { needed: usize, have: usize },
    #[error("tip heights must be strictly increasing (index {0})")]
    HeightsNotIncreasing(usize),
    #[error("non-finite sample at index {0}")]
    NonFinite(usize),
    #[error("duplicate ratio label {0}")]
    DuplicateLabel(f64),
    #[error("fitted slope for ratio {0} is not positive")]
    NonPositiveSlope(f64),
    #[error("ratio model needs at least 2 distinct labels, have {0}")]
    TooFewLabels(usize),
    #[error("points are collinear")]
    Collinear,
    #[error("batter not uniform after {0} trials")]
    NotUniform(usize),
    #[error("level must be positive, got {0}")]
    InvalidLevel(f64),
    #[error("{0}")]
    Format(String),
    #[error(transparent)]
    Sim(#[from] SimError),
}

pub type Result<T, E = PerceptionError> = std::result::Result<T, E>;
