use super::{ControlError, MlpModel, Result};
use crate::sim::{spread_thickness, SurrogateParams};

/// Commanded arm speeds are clamped to this range, m/s.
pub const SPEED_LIMITS: (f64, f64) = (0.001, 0.1);
/// Commanded pour times are clamped to this range, s.
pub const TIME_LIMITS: (f64, f64) = (0.5, 120.0);

/// Speed that lays a swath of `width` at the surrogate flow rate.
pub fn analytic_speed(ratio: f64, width: f64, params: &SurrogateParams) -> f64 {
    params.flow_rate / (spread_thickness(ratio, params) * width)
}

/// Stationary pour time that spreads into a disk of `diameter`.
pub fn analytic_pour_time(ratio: f64, diameter: f64, params: &SurrogateParams) -> f64 {
    let area = std::f64::consts::PI * diameter * diameter / 4.0;
    area * spread_thickness(ratio, params) / params.flow_rate
}

fn predict(model: &MlpModel, x: [f64; 2], limits: (f64, f64), what: &str) -> Result<f64> {
    if !model.trained {
        return Err(ControlError::Untrained);
    }
    if x.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(ControlError::InvalidParameter(format!("{what} inputs must be positive, got {x:?}")));
    }
    for (j, (&v, &(lo, hi))) in x.iter().zip(&model.norms.x_range).enumerate() {
        let slack = 0.1 * (hi - lo).abs();
        if v < lo - slack || v > hi + slack {
            log::warn!("{what} feature {j} = {v} is outside the training range [{lo}, {hi}]");
        }
    }
    let y = model.forward(&x)?;
    if !y.is_finite() {
        return Err(ControlError::NonFiniteInput);
    }
    Ok(y.clamp(limits.0, limits.1))
}

/// Arm speed for a stroke of `width` at batter `ratio`, clamped to [`SPEED_LIMITS`].
pub fn predict_speed(model: &MlpModel, ratio: f64, width: f64) -> Result<f64> {
    predict(model, [ratio, width], SPEED_LIMITS, "speed")
}

/// Pour time for a disk of `diameter` at batter `ratio`, clamped to [`TIME_LIMITS`].
pub fn predict_pour_time(model: &MlpModel, ratio: f64, diameter: f64) -> Result<f64> {
    predict(model, [ratio, diameter], TIME_LIMITS, "time")
}
