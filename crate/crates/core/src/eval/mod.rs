//! Simulated re-runs of the line, round-shape and perception experiments,
//! with their baselines, plus the width, area and overlap metrics they use.

mod experiments;
mod measure;
mod report;

pub use experiments::{
    derive_seed, pour_shape, pour_trajectory, run_line_experiment, run_perception_experiment, run_round_experiment,
    stratified_ratios, train_ratio_model, train_speed_model, train_time_model, LineExperimentConfig,
    PerceptionExperimentConfig, RoundExperimentConfig, ShapePour,
};
pub use measure::{iou, measure_disk, measure_stroke_width, DiskMeasurement, WidthMeasurement, WIDTH_SAMPLE_SPACING};
pub use report::{ExperimentReport, MethodSummary, ReportRow};

use thiserror::Error;

use crate::{control::ControlError, perception::PerceptionError, planner::PlannerError, sim::SimError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("stroke point ({0}, {1}) lies outside the deposition grid")]
    StrokeOutsideGrid(f64, f64),
    #[error("nothing was deposited")]
    NoDeposit,
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Format(String),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Perception(#[from] PerceptionError),
    #[error(transparent)]
    Planner(#[from] PlannerError),
    #[error(transparent)]
    Control(#[from] Box<ControlError>),
}

impl From<ControlError> for EvalError {
    fn from(e: ControlError) -> Self {
        Self::Control(Box::new(e))
    }
}

pub type Result<T, E = EvalError> = std::result::Result<T, E>;
