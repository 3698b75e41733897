//! Binary image to pour trajectory.
//!
//! Filled shapes become concentric loops traced on successive erosions; line
//! art becomes strokes cut from the minimum spanning tree of its skeleton.

mod contour;
mod fixtures;
mod graph;
mod loops;
mod mask;
mod morphology;
mod pgm;
mod skeleton;
mod trajectory;

pub use contour::{trace_borders, Border};
pub use fixtures::{fixture_corpus, FIXTURE_STROKE_PX};
pub use graph::{build_graph, mst_refine, tree_to_strokes, SkeletonGraph};
pub use loops::{concentric_loops, gap_fill_strokes, PixelLoop};
pub use mask::BinaryMask;
pub use morphology::{dilate, erode, squared_distance_transform};
pub use pgm::{load_pgm, parse_pgm, save_pgm, write_gray_pgm, DEFAULT_PIXEL_SCALE};
pub use skeleton::skeletonize;
pub use trajectory::{douglas_peucker, to_world, PixelStroke, Stroke, Trajectory};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::{Point2, Vector2};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlannerError {
    #[error("mask has no foreground pixels")]
    EmptyMask,
    #[error("shape has no interior one stroke wide; use open-line mode")]
    NotEnclosed,
    #[error("skeleton graph is empty")]
    EmptyGraph,
    #[error("graph contains a cycle")]
    Cyclic,
    #[error("pgm parse error at byte {offset}: {message}")]
    Pgm { offset: usize, message: String },
    #[error("{0}")]
    Io(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T, E = PlannerError> = std::result::Result<T, E>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ShapeClass {
    Enclosed,
    OpenLines,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlanMode {
    #[default]
    Auto,
    Enclosed,
    Open,
}

impl std::str::FromStr for PlanMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "auto" => Ok(Self::Auto),
            "enclosed" => Ok(Self::Enclosed),
            "open" => Ok(Self::Open),
            _ => Err(format!("unknown plan mode `{s}` (auto|enclosed|open)")),
        }
    }
}

/// Enclosed iff eroding by one full stroke width leaves something.
pub fn classify_shape(mask: &BinaryMask, stroke_width_px: f64) -> Result<ShapeClass> {
    if mask.is_empty() {
        return Err(PlannerError::EmptyMask);
    }
    Ok(if erode(mask, stroke_width_px).is_empty() {
        ShapeClass::OpenLines
    } else {
        ShapeClass::Enclosed
    })
}

/// Pixel-space strokes for `mask`: loops plus gap fill for enclosed shapes,
/// spanning-tree strokes for line art.
pub fn plan_pixels(mask: &BinaryMask, stroke_width_px: f64, mode: PlanMode) -> Result<Vec<PixelStroke>> {
    if !(stroke_width_px > 0.0) {
        return Err(PlannerError::InvalidParameter(format!(
            "stroke width must be positive, got {stroke_width_px} px"
        )));
    }
    let class = match mode {
        PlanMode::Auto => classify_shape(mask, stroke_width_px)?,
        PlanMode::Enclosed => ShapeClass::Enclosed,
        PlanMode::Open => ShapeClass::OpenLines,
    };
    let mut strokes = Vec::new();
    match class {
        ShapeClass::Enclosed => {
            for l in concentric_loops(mask, stroke_width_px)? {
                strokes.push(PixelStroke::closed(l.points));
            }
            strokes.extend(gap_fill_strokes(mask, stroke_width_px)?);
        }
        ShapeClass::OpenLines => {
            let skel = skeletonize(mask);
            let tree = mst_refine(&build_graph(&skel)?)?;
            for s in tree_to_strokes(&tree)? {
                strokes.push(PixelStroke::open(s));
            }
        }
    }
    Ok(strokes)
}

/// Full planner: pixel strokes mapped to the plate with `mask.scale` m/px,
/// simplified to 0.5 px. Single-pixel strokes become short dabs half a stroke
/// long.
pub fn plan(mask: &BinaryMask, stroke_width: f64, mode: PlanMode, plate_origin: Point2) -> Result<Trajectory> {
    if !(mask.scale > 0.0) {
        return Err(PlannerError::InvalidParameter("mask scale must be positive".into()));
    }
    let w_px = stroke_width / mask.scale;
    let strokes = plan_pixels(mask, w_px, mode)?
        .into_iter()
        .map(|s| s.expand_dot(Vector2::new(w_px / 4.0, 0.0)))
        .collect::<Vec<_>>();
    Ok(to_world(&strokes, mask.scale, plate_origin, stroke_width, true))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn disk(r: f64) -> BinaryMask {
        BinaryMask::from_fn(100, 100, 1e-3, |x, y| {
            let (dx, dy) = (x as f64 - 50.0, y as f64 - 50.0);
            dx * dx + dy * dy <= r * r
        })
    }

    #[test]
    fn classify_examples() {
        assert_eq!(classify_shape(&disk(40.0), 10.0).unwrap(), ShapeClass::Enclosed);
        let curve = BinaryMask::from_fn(100, 100, 1e-3, |x, y| {
            let d = ((x as f64 - 50.0).powi(2) + (y as f64 - 50.0).powi(2)).sqrt();
            (d - 30.0).abs() <= 1.0
        });
        assert_eq!(classify_shape(&curve, 10.0).unwrap(), ShapeClass::OpenLines);
        let mut dot = BinaryMask::new(5, 5, 1.0);
        dot.set(2, 2, true);
        assert_eq!(classify_shape(&dot, 10.0).unwrap(), ShapeClass::OpenLines);
        assert_eq!(
            classify_shape(&BinaryMask::new(5, 5, 1.0), 10.0),
            Err(PlannerError::EmptyMask)
        );
    }

    #[test]
    fn disk_plans_four_loops() {
        let t = plan(&disk(40.0), 0.01, PlanMode::Auto, Point2::origin()).unwrap();
        assert_eq!(t.strokes.len(), 4);
        assert!(t.strokes.iter().all(|s| s.closed));
    }
}
