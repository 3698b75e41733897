use serde::{Deserialize, Serialize};

use super::{EvalError, Result};
use crate::geom::{Point2, Vector2};
use crate::planner::{BinaryMask, Stroke};
use crate::sim::{DepositionGrid, DEPOSIT_DETECTION_THICKNESS};

/// Arc-length spacing of width cross-sections, m.
pub const WIDTH_SAMPLE_SPACING: f64 = 2e-3;
/// Cross-sections stop this far from the path, m.
const MAX_HALF_SPAN: f64 = 0.25;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WidthMeasurement {
    pub mean: f64,
    pub variance: f64,
    pub std: f64,
    pub samples: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiskMeasurement {
    /// m²
    pub area: f64,
    /// Diameter of the circle with the same area, m.
    pub diameter: f64,
}

/// Width of the run of batter crossing the path at `p` along normal `n`:
/// integrated thickness over peak thickness. `None` if the path point is bare.
fn cross_section(grid: &DepositionGrid, p: Point2, n: Vector2) -> Option<f64> {
    let h = grid.resolution() / 4.0;
    let centre = grid.sample(p);
    if centre < DEPOSIT_DETECTION_THICKNESS {
        return None;
    }
    let (mut sum, mut peak) = (centre, centre);
    for sign in [-1.0, 1.0] {
        let mut k = 1.0;
        while k * h <= MAX_HALF_SPAN {
            let t = grid.sample(p + n * (sign * k * h));
            if t < DEPOSIT_DETECTION_THICKNESS {
                break;
            }
            sum += t;
            peak = peak.max(t);
            k += 1.0;
        }
    }
    Some(sum * h / peak)
}

fn point_and_normal(path: &[Point2], s: f64) -> (Point2, Vector2) {
    let mut acc = 0.0;
    let mut last = None;
    for w in path.windows(2) {
        let d = w[1] - w[0];
        let seg = d.norm();
        if seg == 0.0 {
            continue;
        }
        let u = d / seg;
        let normal = Vector2::new(-u.y, u.x);
        if acc + seg >= s {
            return (w[0] + u * (s - acc).max(0.0), normal);
        }
        acc += seg;
        last = Some((w[1], normal));
    }
    last.unwrap_or((path[0], Vector2::new(0.0, 1.0)))
}

/// Mean and spread of the deposited width along `stroke`, from
/// cross-sections every 2 mm that skip one half-width at each open end.
/// Each cross-section width is the integrated thickness over the peak
/// thickness of the covered run, which stays exact under anti-aliasing.
pub fn measure_stroke_width(grid: &DepositionGrid, stroke: &Stroke) -> Result<WidthMeasurement> {
    if stroke.points.len() < 2 {
        return Err(EvalError::InvalidParameter("stroke needs at least two points".into()));
    }
    if let Some(p) = stroke.points.iter().find(|p| !grid.contains(**p)) {
        return Err(EvalError::StrokeOutsideGrid(p.x, p.y));
    }
    if grid.max_thickness() < DEPOSIT_DETECTION_THICKNESS {
        return Err(EvalError::NoDeposit);
    }
    let mut path = stroke.points.clone();
    if stroke.closed {
        path.push(stroke.points[0]);
    }
    let length = crate::geom::polyline_length(&path);
    if length == 0.0 {
        return Err(EvalError::InvalidParameter("stroke has zero length".into()));
    }
    let (mid, n) = point_and_normal(&path, length / 2.0);
    let estimate = cross_section(grid, mid, n).ok_or(EvalError::NoDeposit)?;
    let cap = if stroke.closed { 0.0 } else { estimate / 2.0 };
    let positions: Vec<f64> = if length - 2.0 * cap <= WIDTH_SAMPLE_SPACING {
        vec![length / 2.0]
    } else {
        let n = ((length - 2.0 * cap) / WIDTH_SAMPLE_SPACING).floor() as usize;
        (0..=n).map(|k| cap + k as f64 * WIDTH_SAMPLE_SPACING).collect()
    };
    let samples: Vec<f64> = positions
        .into_iter()
        .filter_map(|s| {
            let (p, n) = point_and_normal(&path, s);
            cross_section(grid, p, n)
        })
        .collect();
    if samples.is_empty() {
        return Err(EvalError::NoDeposit);
    }
    let (mean, variance) = mean_variance(&samples);
    Ok(WidthMeasurement {
        mean,
        variance,
        std: variance.sqrt(),
        samples,
    })
}

/// Covered area as thickness-weighted cell count, `sum(t / t_peak) * res^2`,
/// and its equivalent diameter.
pub fn measure_disk(grid: &DepositionGrid) -> Result<DiskMeasurement> {
    let peak = grid.max_thickness();
    if peak < DEPOSIT_DETECTION_THICKNESS {
        return Err(EvalError::NoDeposit);
    }
    let res = grid.resolution();
    let area = grid.cells().iter().map(|t| t / peak).sum::<f64>() * res * res;
    Ok(DiskMeasurement {
        area,
        diameter: 2.0 * (area / std::f64::consts::PI).sqrt(),
    })
}

/// Intersection over union of two same-sized masks.
pub fn iou(a: &BinaryMask, b: &BinaryMask) -> Result<f64> {
    if a.width() != b.width() || a.height() != b.height() {
        return Err(EvalError::InvalidParameter(format!(
            "mask sizes differ: {}x{} vs {}x{}",
            a.width(),
            a.height(),
            b.width(),
            b.height()
        )));
    }
    let (mut inter, mut union) = (0usize, 0usize);
    for y in 0..a.height() {
        for x in 0..a.width() {
            let (p, q) = (a.get(x, y), b.get(x, y));
            inter += usize::from(p && q);
            union += usize::from(p || q);
        }
    }
    if union == 0 {
        return Err(EvalError::NoDeposit);
    }
    Ok(inter as f64 / union as f64)
}

/// Population mean and variance.
pub(crate) fn mean_variance(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    (m, v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n)
}
