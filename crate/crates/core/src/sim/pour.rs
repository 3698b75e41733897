use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{BatterTruth, Result, SimError, SurrogateParams};
use crate::planner::BinaryMask;

/// Tilt at which batter at `level` reaches the spout lip.
pub fn theta_start(level: f64, params: &SurrogateParams) -> f64 {
    params.theta_max - params.c_theta * level
}

/// Inverse of [`theta_start`]: batter above this level drains when the bowl is
/// held at `angle`.
pub fn level_at_threshold(angle: f64, params: &SurrogateParams) -> f64 {
    (params.theta_max - angle) / params.c_theta
}

/// Quasi-static outflow at tilt `angle`: nothing below the threshold, the
/// constant `flow_rate` at or above it.
pub fn pour_flow(angle: f64, truth: &BatterTruth, params: &SurrogateParams) -> f64 {
    if angle >= theta_start(truth.level, params) {
        params.flow_rate
    } else {
        0.0
    }
}

/// Volume discharged when the bowl is jumped to `angle` and held until it
/// stops draining: everything above the lip plus the film left on the spout.
pub fn hold_discharge(truth: &BatterTruth, params: &SurrogateParams, angle: f64) -> f64 {
    let retained_level = level_at_threshold(angle, params).max(0.0);
    let excess = (truth.level - retained_level).max(0.0) * truth.bowl.cross_section_area();
    if excess > 0.0 {
        (excess + params.spout_film_volume).min(truth.volume())
    } else {
        0.0
    }
}

/// Synthetic overhead camera watching the spout.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpoutCamera {
    pub width: usize,
    pub height: usize,
    /// frames per second
    pub frame_rate: f64,
    /// First row of the batter pooled behind the spout.
    pub pool_top: usize,
    /// Vertical extent of the pooled batter before it flows, px.
    pub base_extent: usize,
    /// Extra extent once batter reaches the spout tip, px.
    pub spout_length: usize,
    /// Inclusive range of the per-frame advance of the batter front, px.
    pub advance: (usize, usize),
}

impl Default for SpoutCamera {
    fn default() -> Self {
        Self {
            width: 48,
            height: 64,
            frame_rate: 10.0,
            pool_top: 8,
            base_extent: 10,
            spout_length: 24,
            advance: (3, 6),
        }
    }
}

/// Generated frames plus the generator's ground truth.
#[derive(Debug, Clone)]
pub struct SpoutSequence {
    pub masks: Vec<BinaryMask>,
    /// First frame whose tilt is at or past the pouring threshold.
    pub flow_start: Option<usize>,
    /// First frame with batter at the spout tip.
    pub spout_end: Option<usize>,
}

impl SpoutSequence {
    pub fn extents(&self) -> Vec<usize> {
        self.masks
            .iter()
            .map(|m| m.vertical_extent().unwrap_or(0))
            .collect()
    }
}

/// Binary batter masks for a tilt profile sampled at the camera frame rate.
///
/// The batter extent is constant before the threshold angle, grows strictly
/// while the front runs down the spout and is constant once it reaches the tip.
pub fn spout_mask_sequence(
    angle_profile: &[f64],
    truth: &BatterTruth,
    params: &SurrogateParams,
    camera: &SpoutCamera,
    rng_seed: u64,
) -> Result<SpoutSequence> {
    if let Some(i) = angle_profile.windows(2).position(|w| w[1] < w[0]) {
        return Err(SimError::AngleProfileDecreasing(i + 1));
    }
    let (lo, hi) = camera.advance;
    if lo < 1 || hi < lo {
        return Err(SimError::InvalidParameter("spout advance range must satisfy 1 <= lo <= hi".into()));
    }
    let bottom = camera.pool_top + camera.base_extent + camera.spout_length;
    if bottom >= camera.height || camera.width < 24 {
        return Err(SimError::InvalidParameter("spout camera frame too small".into()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let rate = rng.gen_range(lo..=hi);
    let pool_left = rng.gen_range(1..=camera.width - 22);
    let threshold = theta_start(truth.level, params);
    let flow_start = angle_profile.iter().position(|&a| a >= threshold);

    let mut masks = Vec::with_capacity(angle_profile.len());
    let mut spout_end = None;
    for k in 0..angle_profile.len() {
        let advance = match flow_start {
            Some(f) if k >= f => (rate * (k - f + 1)).min(camera.spout_length),
            _ => 0,
        };
        if advance == camera.spout_length && spout_end.is_none() {
            spout_end = Some(k);
        }
        let wobble: i64 = rng.gen_range(-1..=1);
        let left = (pool_left as i64 + wobble).max(0) as usize;
        let pool_rows = camera.pool_top..=camera.pool_top + camera.base_extent;
        let stream_top = camera.pool_top + camera.base_extent + 1;
        let stream_rows = stream_top..stream_top + advance;
        masks.push(BinaryMask::from_fn(camera.width, camera.height, 1.0, |x, y| {
            (pool_rows.contains(&y) && (left..left + 20).contains(&x))
                || (stream_rows.contains(&y) && (left + 7..left + 13).contains(&x))
        }));
    }
    Ok(SpoutSequence {
        masks,
        flow_start,
        spout_end,
    })
}

/// Grayscale rendering of a batter mask: bright batter on a darker bowl, with
/// seeded pixel noise. Row-major, one byte per pixel.
pub fn render_gray_frame(mask: &BinaryMask, seed: u64) -> Vec<u8> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, 12.0).expect("valid std");
    let mut out = Vec::with_capacity(mask.width() * mask.height());
    for y in 0..mask.height() {
        for x in 0..mask.width() {
            let base = if mask.get(x, y) { 200.0 } else { 70.0 };
            let v: f64 = base + noise.sample(&mut rng);
            out.push(v.round().clamp(0.0, 255.0) as u8);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::BowlSpec;

    fn truth(level: f64) -> BatterTruth {
        BatterTruth::new(1.3, level, BowlSpec::small()).unwrap()
    }

    #[test]
    fn upright_bowl_does_not_pour() {
        let p = SurrogateParams::default();
        assert_eq!(pour_flow(0.0, &truth(0.03), &p), 0.0);
    }

    #[test]
    fn threshold_is_closed() {
        let p = SurrogateParams::default();
        let t = truth(0.03);
        let th = theta_start(t.level, &p);
        assert_eq!(pour_flow(th, &t, &p), p.flow_rate);
        assert_eq!(pour_flow(th - 1e-9, &t, &p), 0.0);
    }

    #[test]
    fn fuller_bowls_pour_sooner() {
        let p = SurrogateParams::default();
        assert!(theta_start(0.04, &p) < theta_start(0.02, &p));
        assert!((level_at_threshold(theta_start(0.027, &p), &p) - 0.027).abs() < 1e-15);
    }

    #[test]
    fn holding_drains_excess_plus_film() {
        let p = SurrogateParams::default();
        let t = truth(0.03);
        let angle = theta_start(0.025, &p);
        let expected = 0.005 * t.bowl.cross_section_area() + p.spout_film_volume;
        assert!((hold_discharge(&t, &p, angle) - expected).abs() < 1e-15);
        assert_eq!(hold_discharge(&t, &p, theta_start(0.035, &p)), 0.0);
    }

    #[test]
    fn below_threshold_extents_constant() {
        let p = SurrogateParams::default();
        let t = truth(0.03);
        let angles = vec![0.1; 12];
        let seq = spout_mask_sequence(&angles, &t, &p, &SpoutCamera::default(), 1).unwrap();
        assert!(seq.flow_start.is_none());
        let e = seq.extents();
        assert!(e.iter().all(|&x| x == e[0]));
    }

    #[test]
    fn ramp_extents_have_one_increasing_run() {
        let p = SurrogateParams::default();
        let t = truth(0.03);
        let th = theta_start(t.level, &p);
        let angles: Vec<f64> = (0..40).map(|k| th - 0.01 + 0.0007 * k as f64).collect();
        let seq = spout_mask_sequence(&angles, &t, &p, &SpoutCamera::default(), 5).unwrap();
        let e = seq.extents();
        assert!(e.windows(2).all(|w| w[1] >= w[0]));
        let rising: Vec<bool> = e.windows(2).map(|w| w[1] > w[0]).collect();
        let runs = rising.windows(2).filter(|w| !w[0] && w[1]).count() + usize::from(rising[0]);
        assert_eq!(runs, 1);
        let f = seq.flow_start.unwrap();
        assert!(angles[f] >= th && angles[f - 1] < th);
        assert!(seq.spout_end.unwrap() > f);
    }

    #[test]
    fn decreasing_profile_rejected() {
        let p = SurrogateParams::default();
        let r = spout_mask_sequence(&[0.2, 0.1], &truth(0.03), &p, &SpoutCamera::default(), 0);
        assert!(matches!(r, Err(SimError::AngleProfileDecreasing(1))));
    }
}
