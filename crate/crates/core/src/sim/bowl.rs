use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{BowlSpec, Result, SimError};
use crate::geom::{Point2, Vector2};

/// Forward, backward, left, right.
pub const PROBE_DIRECTIONS: [(f64, f64); 4] = [(1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0)];

/// Point where a whisk moving from `start` along `direction` first touches the
/// bowl wall, i.e. where the lateral force would trip the contact threshold.
pub fn probe_bowl_contact(bowl: &BowlSpec, start: Point2, direction: Vector2) -> Result<Point2> {
    let norm = direction.norm();
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(SimError::InvalidParameter("probe direction must be nonzero".into()));
    }
    let d = direction / norm;
    let rel = start - bowl.center;
    let c = rel.norm_squared() - bowl.radius * bowl.radius;
    if c >= 0.0 {
        return Err(SimError::StartOutsideBowl);
    }
    // |rel + t d|^2 = r^2, c < 0 so exactly one positive root
    let b = d.dot(&rel);
    let t = -b + (b * b - c).sqrt();
    Ok(start + d * t)
}

/// Contacts along [`PROBE_DIRECTIONS`], each displaced uniformly within a disk
/// of radius `jitter` to model compliance and threshold timing.
pub fn probe_contacts(
    bowl: &BowlSpec,
    start: Point2,
    jitter: f64,
    seed: u64,
) -> Result<Vec<Point2>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    PROBE_DIRECTIONS
        .iter()
        .map(|&(dx, dy)| {
            let p = probe_bowl_contact(bowl, start, Vector2::new(dx, dy))?;
            let r = jitter * rng.gen::<f64>().sqrt();
            let phi = rng.gen::<f64>() * std::f64::consts::TAU;
            Ok(p + Vector2::new(r * phi.cos(), r * phi.sin()))
        })
        .collect()
}
