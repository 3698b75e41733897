//! Surrogate physics standing in for the robot, force-torque sensor, batter,
//! bowl, pouring spout, camera and griddle.
//!
//! All state is plain values: operations take a [`BatterTruth`] (and a seed
//! where randomness is involved) and return new values, so independent
//! simulations can run side by side without coordination.

mod bowl;
mod deposit;
mod params;
mod pour;
mod stir;
mod torque;

pub use bowl::{probe_bowl_contact, probe_contacts, PROBE_DIRECTIONS};
pub use deposit::{
    deposit_disk, deposit_segment, deposit_stroke, spread_thickness, swath_width, DepositionGrid,
    DEFAULT_GRID_RESOLUTION, DEPOSIT_DETECTION_THICKNESS,
};
pub use params::{BatterTruth, BowlSpec, SurrogateParams, FLOUR_DENSITY, WATER_DENSITY};
pub use pour::{
    hold_discharge, level_at_threshold, pour_flow, render_gray_frame, spout_mask_sequence,
    theta_start, SpoutCamera, SpoutSequence,
};
pub use stir::{
    apply_stir_motion, preliminary_sequence, quick_stir_trial, run_preliminary, StirKind,
    StirMotion, StirSpeed, PRELIMINARY_DURATION, TRIAL_STIR_DURATION, TRIAL_STIR_ROUNDS,
};
pub use torque::{mean_torque, push_noise_sigma, run_push_sequence, torque_for_push, TorqueSensor};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("push heights list is empty")]
    EmptyHeights,
    #[error("push heights must be strictly increasing (index {0})")]
    HeightsNotIncreasing(usize),
    #[error("probe start point lies outside the bowl")]
    StartOutsideBowl,
    #[error("speed must be positive, got {0}")]
    NonPositiveSpeed(f64),
    #[error("angle profile must be nondecreasing (index {0})")]
    AngleProfileDecreasing(usize),
}

pub type Result<T, E = SimError> = std::result::Result<T, E>;
