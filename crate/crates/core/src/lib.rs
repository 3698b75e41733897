//! Simulated pancake-making pipeline.
//!
//! The crate is split along the stages of the robot's workflow:
//!
//! - [`sim`]: surrogate batter, bowl, force-torque sensor, spout camera and griddle.
//!   Every estimator in the crate is tested against this ground truth.
//! - [`perception`]: uniformity stopping, liquid level, water-flour ratio and bowl
//!   localization from simulated push torques and contacts.
//! - [`planner`]: binary image to pour trajectory (concentric erosion loops for
//!   filled shapes, skeleton + minimum spanning tree strokes for line art).
//! - [`control`]: from-scratch MLP speed/time regressors, k-means batter
//!   segmentation, drip detection and pour-plan timing.
//! - [`eval`]: simulated re-runs of the line-stroke, round-shape and perception
//!   experiments with their baselines.
//! - [`cli`]: the `pancake` command line front end.

pub mod cli;
pub mod control;
pub mod eval;
pub mod geom;
pub mod perception;
pub mod planner;
pub mod sim;

pub use geom::{Point2, Vector2};
