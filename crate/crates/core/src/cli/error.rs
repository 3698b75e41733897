use crate::{control::ControlError, eval::EvalError, perception::PerceptionError, planner::PlannerError, sim::SimError};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad flags, config or input files.
    #[error("{0}")]
    Invalid(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Invalid(_) => 2,
            Self::Runtime(_) => 3,
        }
    }

    pub(crate) fn io(path: &std::path::Path, e: std::io::Error) -> Self {
        Self::Runtime(format!("{}: {e}", path.display()))
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::InvalidParameter(_) | SimError::StartOutsideBowl => Self::Invalid(e.to_string()),
            _ => Self::Runtime(e.to_string()),
        }
    }
}

impl From<PerceptionError> for CliError {
    fn from(e: PerceptionError) -> Self {
        use PerceptionError::*;
        match e {
            Sim(s) => s.into(),
            Format(_) | InvalidThreshold(_) | HeightsNotIncreasing(_) | NonFinite(_) | DuplicateLabel(_)
            | TooFewSamples { .. } | TooFewLabels(_) | InvalidLevel(_) => Self::Invalid(e.to_string()),
            _ => Self::Runtime(e.to_string()),
        }
    }
}

impl From<PlannerError> for CliError {
    fn from(e: PlannerError) -> Self {
        match e {
            PlannerError::Pgm { .. } | PlannerError::Io(_) | PlannerError::InvalidParameter(_) => {
                Self::Invalid(e.to_string())
            }
            _ => Self::Runtime(e.to_string()),
        }
    }
}

impl From<ControlError> for CliError {
    fn from(e: ControlError) -> Self {
        use ControlError::*;
        match e {
            Sim(s) => s.into(),
            Perception(p) => p.into(),
            Eval(b) => (*b).into(),
            InvalidParameter(_) | Format(_) | InputDimension { .. } | EmptyDataset | Untrained | EmptyTrajectory
            | NonFiniteInput => Self::Invalid(e.to_string()),
            _ => Self::Runtime(e.to_string()),
        }
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::Sim(s) => s.into(),
            EvalError::Perception(p) => p.into(),
            EvalError::Planner(p) => p.into(),
            EvalError::Control(c) => (*c).into(),
            EvalError::InvalidParameter(_) | EvalError::Format(_) => Self::Invalid(e.to_string()),
            _ => Self::Runtime(e.to_string()),
        }
    }
}
