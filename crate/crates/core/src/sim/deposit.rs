use serde::{Deserialize, Serialize};

use super::{BatterTruth, Result, SimError, SurrogateParams};
use crate::geom::{point_segment_distance, polyline_length, Point2};
use crate::planner::BinaryMask;

/// 1 mm cells.
pub const DEFAULT_GRID_RESOLUTION: f64 = 1e-3;
/// Cells thinner than 0.1 mm count as bare griddle.
pub const DEPOSIT_DETECTION_THICKNESS: f64 = 1e-4;

/// Virtual griddle accumulating deposited batter thickness per cell.
///
/// Cell `(i, j)` is centred at `origin + (i, j) * resolution`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DepositionGrid {
    resolution: f64,
    width: usize,
    height: usize,
    origin: Point2,
    cells: Vec<f64>,
}

impl DepositionGrid {
    pub fn new(origin: Point2, width: usize, height: usize, resolution: f64) -> Result<Self> {
        if !(resolution > 0.0) || width == 0 || height == 0 {
            return Err(SimError::InvalidParameter(
                "deposition grid needs positive resolution and size".into(),
            ));
        }
        Ok(Self {
            resolution,
            width,
            height,
            origin,
            cells: vec![0.0; width * height],
        })
    }

    /// Smallest grid with cell centres spanning the box `min..=max`.
    pub fn covering(min: Point2, max: Point2, resolution: f64) -> Result<Self> {
        let span = max - min;
        let width = (span.x / resolution).ceil().max(0.0) as usize + 1;
        let height = (span.y / resolution).ceil().max(0.0) as usize + 1;
        Self::new(min, width, height, resolution)
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn origin(&self) -> Point2 {
        self.origin
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.cells[j * self.width + i]
    }

    pub fn cells(&self) -> &[f64] {
        &self.cells
    }

    pub fn cell_center(&self, i: usize, j: usize) -> Point2 {
        self.origin + nalgebra::Vector2::new(i as f64, j as f64) * self.resolution
    }

    pub fn total_volume(&self) -> f64 {
        self.cells.iter().sum::<f64>() * self.resolution * self.resolution
    }

    pub fn max_thickness(&self) -> f64 {
        self.cells.iter().copied().fold(0.0, f64::max)
    }

    /// Bilinear interpolation between cell centres; zero outside the grid.
    pub fn sample(&self, p: Point2) -> f64 {
        let u = (p.x - self.origin.x) / self.resolution;
        let v = (p.y - self.origin.y) / self.resolution;
        let (i0, j0) = (u.floor(), v.floor());
        let (fu, fv) = (u - i0, v - j0);
        let at = |i: f64, j: f64| -> f64 {
            if i < 0.0 || j < 0.0 || i >= self.width as f64 || j >= self.height as f64 {
                0.0
            } else {
                self.get(i as usize, j as usize)
            }
        };
        at(i0, j0) * (1.0 - fu) * (1.0 - fv)
            + at(i0 + 1.0, j0) * fu * (1.0 - fv)
            + at(i0, j0 + 1.0) * (1.0 - fu) * fv
            + at(i0 + 1.0, j0 + 1.0) * fu * fv
    }

    pub fn contains(&self, p: Point2) -> bool {
        let u = (p.x - self.origin.x) / self.resolution;
        let v = (p.y - self.origin.y) / self.resolution;
        u >= -0.5 && v >= -0.5 && u < self.width as f64 - 0.5 && v < self.height as f64 - 0.5
    }

    /// Cells at or above `threshold` thickness.
    pub fn covered_mask(&self, threshold: f64) -> BinaryMask {
        BinaryMask::from_fn(self.width, self.height, self.resolution, |i, j| {
            self.get(i, j) >= threshold
        })
    }

    /// 8-bit grayscale rendering: `gray = round(255 * min(1, thickness / full_scale))`.
    pub fn to_gray(&self, full_scale: f64) -> Vec<u8> {
        self.cells
            .iter()
            .map(|&t| (255.0 * (t / full_scale).clamp(0.0, 1.0)).round() as u8)
            .collect()
    }

    /// Index range of cells whose centres lie within `margin` of the box.
    fn cell_range(&self, min: Point2, max: Point2, margin: f64) -> Option<(usize, usize, usize, usize)> {
        let lo_i = ((min.x - margin - self.origin.x) / self.resolution).floor().max(0.0);
        let lo_j = ((min.y - margin - self.origin.y) / self.resolution).floor().max(0.0);
        let hi_i = ((max.x + margin - self.origin.x) / self.resolution).ceil();
        let hi_j = ((max.y + margin - self.origin.y) / self.resolution).ceil();
        if hi_i < 0.0 || hi_j < 0.0 {
            return None;
        }
        let hi_i = (hi_i as usize).min(self.width - 1);
        let hi_j = (hi_j as usize).min(self.height - 1);
        let (lo_i, lo_j) = (lo_i as usize, lo_j as usize);
        (lo_i <= hi_i && lo_j <= hi_j).then_some((lo_i, hi_i, lo_j, hi_j))
    }
}

/// Spread thickness of a puddle of batter at `ratio`: wetter batter spreads thinner.
pub fn spread_thickness(ratio: f64, params: &SurrogateParams) -> f64 {
    params.thickness0 * (-params.gamma * (ratio - 1.0)).exp()
}

/// Width of the swath laid by flow `flow` (m³/s) moving at `speed` (m/s).
pub fn swath_width(flow: f64, speed: f64, thickness: f64) -> f64 {
    flow / (speed * thickness)
}

/// Anti-aliased coverage of a cell whose centre is `distance` from a shape edge
/// at `half_width`.
fn coverage(distance: f64, half_width: f64, resolution: f64) -> f64 {
    (0.5 + (half_width - distance) / resolution).clamp(0.0, 1.0)
}

/// Deposits one pen-down stroke moving at `speed` with the bowl pouring at the
/// surrogate flow rate. Returns the volume added to the grid.
///
/// The swath is a stadium of width `flow_rate / (speed * thickness)` around the
/// path. Open strokes pull their end caps in by `pi * w / 8` so the deposited
/// volume equals `flow_rate * length / speed`. Overlap within one stroke takes
/// the max thickness; separate strokes add.
pub fn deposit_stroke(
    grid: &mut DepositionGrid,
    points: &[Point2],
    closed: bool,
    speed: f64,
    truth: &BatterTruth,
    params: &SurrogateParams,
) -> Result<f64> {
    if !(speed > 0.0) || !speed.is_finite() {
        return Err(SimError::NonPositiveSpeed(speed));
    }
    if points.len() < 2 {
        return Err(SimError::InvalidParameter("stroke needs at least two points".into()));
    }
    let thickness = spread_thickness(truth.ratio, params);
    let width = swath_width(params.flow_rate, speed, thickness);
    let mut path: Vec<Point2> = points.to_vec();
    if closed {
        path.push(points[0]);
    }
    let length = polyline_length(&path);
    if length == 0.0 {
        return Ok(0.0);
    }
    let core = if closed {
        path
    } else {
        let trim = std::f64::consts::PI * width / 8.0;
        if length <= 2.0 * trim {
            // too short for a stadium: a round blob with the same volume
            let radius = (width * length / std::f64::consts::PI).sqrt();
            let mid = point_at_length(&path, length / 2.0);
            return Ok(stamp(grid, &[mid], radius, thickness));
        }
        trim_polyline(&path, trim, trim)
    };
    Ok(stamp(grid, &core, width / 2.0, thickness))
}

pub fn deposit_segment(
    grid: &mut DepositionGrid,
    a: Point2,
    b: Point2,
    speed: f64,
    truth: &BatterTruth,
    params: &SurrogateParams,
) -> Result<f64> {
    deposit_stroke(grid, &[a, b], false, speed, truth, params)
}

/// Stationary pour of `volume` m³ centred at `center`: a disk of the batter's
/// spread thickness.
pub fn deposit_disk(
    grid: &mut DepositionGrid,
    center: Point2,
    volume: f64,
    truth: &BatterTruth,
    params: &SurrogateParams,
) -> Result<f64> {
    if !(volume >= 0.0) {
        return Err(SimError::InvalidParameter(format!("volume must be nonnegative, got {volume}")));
    }
    let thickness = spread_thickness(truth.ratio, params);
    let radius = (volume / (std::f64::consts::PI * thickness)).sqrt();
    Ok(stamp(grid, &[center], radius, thickness))
}

/// Max-combines the swath of `half_width` around `path` (a single point stamps
/// a disk) into a scratch layer and adds it to the grid.
fn stamp(grid: &mut DepositionGrid, path: &[Point2], half_width: f64, thickness: f64) -> f64 {
    let res = grid.resolution;
    let (mut min, mut max) = (path[0], path[0]);
    for p in path {
        min = Point2::new(min.x.min(p.x), min.y.min(p.y));
        max = Point2::new(max.x.max(p.x), max.y.max(p.y));
    }
    let Some((i0, i1, j0, j1)) = grid.cell_range(min, max, half_width + res) else {
        return 0.0;
    };
    let lw = i1 - i0 + 1;
    let mut layer = vec![0.0f64; lw * (j1 - j0 + 1)];
    let segments: Vec<(Point2, Point2)> = if path.len() == 1 {
        vec![(path[0], path[0])]
    } else {
        path.windows(2).map(|w| (w[0], w[1])).collect()
    };
    for (a, b) in segments {
        let smin = Point2::new(a.x.min(b.x), a.y.min(b.y));
        let smax = Point2::new(a.x.max(b.x), a.y.max(b.y));
        let Some((si0, si1, sj0, sj1)) = grid.cell_range(smin, smax, half_width + res) else {
            continue;
        };
        for j in sj0..=sj1 {
            for i in si0..=si1 {
                let c = grid.cell_center(i, j);
                let cov = coverage(point_segment_distance(&c, &a, &b), half_width, res);
                let slot = &mut layer[(j - j0) * lw + (i - i0)];
                *slot = slot.max(cov);
            }
        }
    }
    let mut added = 0.0;
    for j in j0..=j1 {
        for i in i0..=i1 {
            let t = layer[(j - j0) * lw + (i - i0)] * thickness;
            grid.cells[j * grid.width + i] += t;
            added += t;
        }
    }
    added * res * res
}

fn point_at_length(path: &[Point2], s: f64) -> Point2 {
    let mut acc = 0.0;
    for w in path.windows(2) {
        let seg = (w[1] - w[0]).norm();
        if acc + seg >= s && seg > 0.0 {
            return w[0] + (w[1] - w[0]) * ((s - acc) / seg);
        }
        acc += seg;
    }
    *path.last().expect("nonempty path")
}

/// Removes arc length `head` from the start and `tail` from the end.
fn trim_polyline(path: &[Point2], head: f64, tail: f64) -> Vec<Point2> {
    let total = polyline_length(path);
    let (start, end) = (head, total - tail);
    let mut out = vec![point_at_length(path, start)];
    let mut acc = 0.0;
    for w in path.windows(2) {
        acc += (w[1] - w[0]).norm();
        if acc > start && acc < end {
            out.push(w[1]);
        }
    }
    out.push(point_at_length(path, end));
    out.dedup_by(|a, b| (*a - *b).norm() == 0.0);
    if out.len() == 1 {
        out.push(out[0]);
    }
    out
}
