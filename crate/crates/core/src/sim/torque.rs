use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{BatterTruth, Result, SimError, SurrogateParams};
use crate::perception::TorqueCurve;

/// Noise-free mean resistance torque of one push with the whisk tip at
/// `tip_height` above the bowl bottom.
///
/// `T = kappa * exp(-beta * ratio) * (level - tip_height) * (1 + u / tau_u)^-alpha`
/// inside the batter and zero above it.
pub fn mean_torque(truth: &BatterTruth, params: &SurrogateParams, tip_height: f64) -> f64 {
    let immersion = truth.level - tip_height;
    if immersion <= 0.0 {
        return 0.0;
    }
    let stir_decay = (1.0 + truth.stir_progress / params.tau_u).powf(-params.alpha);
    params.kappa * (-params.beta * truth.ratio).exp() * immersion * stir_decay
}

/// Standard deviation of the reading for a push at `tip_height`.
///
/// The sensor floor `sigma_air` is always present; pushes inside the batter add
/// `sigma_batter_frac` of the batter's full-immersion torque in quadrature.
pub fn push_noise_sigma(truth: &BatterTruth, params: &SurrogateParams, tip_height: f64) -> f64 {
    if tip_height >= truth.level {
        params.sigma_air
    } else {
        let full = mean_torque(truth, params, 0.0);
        params.sigma_air.hypot(params.sigma_batter_frac * full)
    }
}

/// Seeded stream of push readings. Successive pushes draw successive normals
/// from one ChaCha stream, so a sweep is reproducible from its seed.
#[derive(Debug, Clone)]
pub struct TorqueSensor {
    rng: ChaCha8Rng,
}

impl TorqueSensor {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn push(&mut self, truth: &BatterTruth, params: &SurrogateParams, tip_height: f64) -> f64 {
        let z: f64 = StandardNormal.sample(&mut self.rng);
        mean_torque(truth, params, tip_height) + push_noise_sigma(truth, params, tip_height) * z
    }

    /// Mean of `count` repeated pushes at one height.
    pub fn averaged_push(
        &mut self,
        truth: &BatterTruth,
        params: &SurrogateParams,
        tip_height: f64,
        count: usize,
    ) -> f64 {
        let count = count.max(1);
        (0..count).map(|_| self.push(truth, params, tip_height)).sum::<f64>() / count as f64
    }

    pub fn sweep(
        &mut self,
        truth: &BatterTruth,
        params: &SurrogateParams,
        heights: &[f64],
    ) -> Result<TorqueCurve> {
        check_heights(heights)?;
        let samples = heights
            .iter()
            .map(|&h| (h, self.push(truth, params, h)))
            .collect();
        Ok(TorqueCurve::from_sorted_unchecked(samples))
    }
}

fn check_heights(heights: &[f64]) -> Result<()> {
    if heights.is_empty() {
        return Err(SimError::EmptyHeights);
    }
    if let Some(&h) = heights.iter().find(|h| !(**h >= 0.0) || !h.is_finite()) {
        return Err(SimError::InvalidParameter(format!(
            "tip height must be nonnegative, got {h}"
        )));
    }
    if let Some(i) = heights.windows(2).position(|w| w[1] <= w[0]) {
        return Err(SimError::HeightsNotIncreasing(i + 1));
    }
    Ok(())
}

/// One simulated push reading. Equal to the first sample of
/// [`run_push_sequence`] with the same seed.
pub fn torque_for_push(
    truth: &BatterTruth,
    params: &SurrogateParams,
    tip_height: f64,
    rng_seed: u64,
) -> Result<f64> {
    check_heights(&[tip_height])?;
    Ok(TorqueSensor::new(rng_seed).push(truth, params, tip_height))
}

pub fn run_push_sequence(
    truth: &BatterTruth,
    params: &SurrogateParams,
    heights: &[f64],
    rng_seed: u64,
) -> Result<TorqueCurve> {
    TorqueSensor::new(rng_seed).sweep(truth, params, heights)
}
