use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{PerceptionError, Result};
use crate::geom::Point2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Circle {
    pub center: Point2,
    pub radius: f64,
}

/// Algebraic (Kasa) least-squares circle, minimizing `Σ(|p - c|² - R²)²`.
///
/// Points are centred and scaled before solving so the result does not depend
/// on where the points sit in the plane.
pub fn fit_circle(points: &[Point2]) -> Result<Circle> {
    let n = points.len();
    if n < 3 {
        return Err(PerceptionError::TooFewSamples { needed: 3, have: n });
    }
    let mean = points.iter().fold(nalgebra::Vector2::zeros(), |a, p| a + p.coords) / n as f64;
    let scale = (points.iter().map(|p| (p.coords - mean).norm_squared()).sum::<f64>() / n as f64).sqrt();
    if !(scale > 0.0) || !scale.is_finite() {
        return Err(PerceptionError::Collinear);
    }
    let q: Vec<_> = points.iter().map(|p| (p.coords - mean) / scale).collect();

    // spread along the thinnest direction, relative to the widest
    let cov = q.iter().fold(nalgebra::Matrix2::zeros(), |a, v| a + v * v.transpose());
    let eig = cov.symmetric_eigen();
    let (lo, hi) = (eig.eigenvalues.min(), eig.eigenvalues.max());
    if lo <= 1e-12 * hi {
        return Err(PerceptionError::Collinear);
    }

    let a = DMatrix::from_fn(n, 3, |i, j| match j {
        0 => 2.0 * q[i].x,
        1 => 2.0 * q[i].y,
        _ => 1.0,
    });
    let b = DVector::from_fn(n, |i, _| q[i].norm_squared());
    let sol = a
        .svd(true, true)
        .solve(&b, 1e-14)
        .map_err(|e| PerceptionError::Format(e.to_string()))?;
    let (cx, cy, c) = (sol[0], sol[1], sol[2]);
    let r2 = c + cx * cx + cy * cy;
    if !(r2 > 0.0) {
        return Err(PerceptionError::Collinear);
    }
    Ok(Circle {
        center: Point2::from(mean + nalgebra::Vector2::new(cx, cy) * scale),
        radius: r2.sqrt() * scale,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_exact_circle() {
        let pts = [
            Point2::new(0.083, 0.0),
            Point2::new(0.0, 0.083),
            Point2::new(-0.083, 0.0),
            Point2::new(0.0, -0.083),
        ];
        let c = fit_circle(&pts).unwrap();
        assert!(c.center.coords.norm() < 1e-9);
        assert!((c.radius - 0.083).abs() < 1e-9);
    }

    #[test]
    fn three_points_circumscribe() {
        let pts = [Point2::new(1.0, 0.0), Point2::new(0.0, 1.0), Point2::new(-1.0, 0.0)];
        let c = fit_circle(&pts).unwrap();
        assert!(c.center.coords.norm() < 1e-12);
        assert!((c.radius - 1.0).abs() < 1e-12);
    }

    #[test]
    fn collinear_rejected() {
        let pts = [Point2::new(0.0, 0.0), Point2::new(1.0, 1.0), Point2::new(2.0, 2.0)];
        assert_eq!(fit_circle(&pts), Err(PerceptionError::Collinear));
        assert!(fit_circle(&pts[..2]).is_err());
    }
}
