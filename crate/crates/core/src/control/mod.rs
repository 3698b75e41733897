//! Pour control: small MLP regressors for arm speed and pour time, k-means
//! batter segmentation, drip detection and trajectory timing.

mod dataset;
mod drip;
mod execute;
mod kmeans;
mod mlp;
mod models;
mod plan;
mod train;

pub use dataset::{gen_speed_dataset, gen_time_dataset, Dataset, DatasetSpec, Task};
pub use drip::{detect_drip, detect_drip_extents, initial_angle, start_pour, DripEvent, PourStart, INITIAL_ANGLE_MARGIN};
pub use execute::{execute_plan, PourOutcome};
pub use kmeans::{kmeans, segment_batter, KMeansResult};
pub use mlp::{Activation, MlpModel, Normalization};
pub use models::{analytic_pour_time, analytic_speed, predict_pour_time, predict_speed, SPEED_LIMITS, TIME_LIMITS};
pub use plan::{plan_execution, Pen, PlannedStroke, PourPlan, Waypoint, TILT_RATE, TRAVEL_SPEED};
pub use train::{gradient_check, loss, train, train_new, TrainConfig};

use thiserror::Error;

use crate::{eval::EvalError, perception::PerceptionError, sim::SimError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ControlError {
    #[error("model is untrained")]
    Untrained,
    #[error("expected {expected} input features, got {got}")]
    InputDimension { expected: usize, got: usize },
    #[error("non-finite input")]
    NonFiniteInput,
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("training diverged at epoch {epoch} (loss {loss}); lower the learning rate")]
    Diverged { epoch: usize, loss: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("k = {k} exceeds the {points} points")]
    TooFewPoints { k: usize, points: usize },
    #[error("need at least {needed} frames, have {have}")]
    TooFewFrames { needed: usize, have: usize },
    #[error("no flow detected")]
    NoFlowDetected,
    #[error("drip not detected before the maximum tilt")]
    DripNotDetected,
    #[error("trajectory has no strokes")]
    EmptyTrajectory,
    #[error("{0}")]
    Format(String),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Perception(#[from] PerceptionError),
    #[error(transparent)]
    Eval(#[from] Box<EvalError>),
}

impl From<EvalError> for ControlError {
    fn from(e: EvalError) -> Self {
        Self::Eval(Box::new(e))
    }
}

pub type Result<T, E = ControlError> = std::result::Result<T, E>;
