use serde::{Deserialize, Serialize};

use super::{
    build_graph, classify_shape, erode, mst_refine, skeletonize, trace_borders, tree_to_strokes,
    BinaryMask, PixelStroke, PlannerError, Result, ShapeClass,
};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PixelLoop {
    pub points: Vec<(usize, usize)>,
    /// 0 for the outermost erosion.
    pub level: usize,
    pub is_hole: bool,
}

/// Borders of `erode(mask, ceil(w/2) + k*w)` for `k = 0, 1, ...` until the
/// erosion vanishes, outer level first.
pub fn concentric_loops(mask: &BinaryMask, stroke_width_px: f64) -> Result<Vec<PixelLoop>> {
    if classify_shape(mask, stroke_width_px)? != ShapeClass::Enclosed {
        return Err(PlannerError::NotEnclosed);
    }
    let first = (stroke_width_px / 2.0).ceil();
    let mut loops = Vec::new();
    for level in 0.. {
        let e = erode(mask, first + level as f64 * stroke_width_px);
        if e.is_empty() {
            break;
        }
        loops.extend(trace_borders(&e).into_iter().map(|b| PixelLoop {
            points: b.points,
            level,
            is_hole: b.is_hole,
        }));
    }
    Ok(loops)
}

/// Open strokes covering the parts of the shape's interior that no loop's
/// swath reaches, e.g. the spine of a bar between 1.5 and 2.5 strokes thick.
/// Regions smaller than one stroke-width square are ignored.
pub fn gap_fill_strokes(mask: &BinaryMask, stroke_width_px: f64) -> Result<Vec<PixelStroke>> {
    let loops = concentric_loops(mask, stroke_width_px)?;
    let mut on_loop = BinaryMask::new(mask.width(), mask.height(), mask.scale);
    for l in &loops {
        for &(x, y) in &l.points {
            on_loop.set(x, y, true);
        }
    }
    let reach = super::dilate(&on_loop, stroke_width_px / 2.0);
    let centres = erode(mask, (stroke_width_px / 2.0).ceil());
    let gaps = BinaryMask::from_fn(mask.width(), mask.height(), mask.scale, |x, y| {
        centres.get(x, y) && !reach.get(x, y)
    });
    let (labels, n) = gaps.components();
    let mut sizes = vec![0usize; n];
    for &l in labels.iter().filter(|&&l| l != usize::MAX) {
        sizes[l] += 1;
    }
    let min_area = (stroke_width_px * stroke_width_px).ceil() as usize;
    let mut strokes = Vec::new();
    for c in (0..n).filter(|&c| sizes[c] >= min_area) {
        let w = mask.width();
        let part = BinaryMask::from_fn(w, mask.height(), mask.scale, |x, y| labels[y * w + x] == c);
        let tree = mst_refine(&build_graph(&skeletonize(&part))?)?;
        strokes.extend(tree_to_strokes(&tree)?.into_iter().map(PixelStroke::open));
    }
    Ok(strokes)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn disk(r: f64) -> BinaryMask {
        BinaryMask::from_fn(100, 100, 1.0, |x, y| {
            (x as f64 - 50.0).powi(2) + (y as f64 - 50.0).powi(2) <= r * r
        })
    }

    fn mean_radius(l: &PixelLoop) -> f64 {
        l.points
            .iter()
            .map(|&(x, y)| ((x as f64 - 50.0).powi(2) + (y as f64 - 50.0).powi(2)).sqrt())
            .sum::<f64>()
            / l.points.len() as f64
    }

    #[test]
    fn disk_gives_four_loops() {
        let loops = concentric_loops(&disk(40.0), 10.0).unwrap();
        assert_eq!(loops.len(), 4);
        for (l, r) in loops.iter().zip([35.0, 25.0, 15.0, 5.0]) {
            assert!((mean_radius(l) - r).abs() <= 1.0, "{} vs {r}", mean_radius(l));
        }
        assert!(gap_fill_strokes(&disk(40.0), 10.0).unwrap().is_empty());
    }

    #[test]
    fn annulus_traces_both_borders() {
        let ring = BinaryMask::from_fn(100, 100, 1.0, |x, y| {
            let d2 = (x as f64 - 50.0).powi(2) + (y as f64 - 50.0).powi(2);
            d2 <= 45.0 * 45.0 && d2 > 20.0 * 20.0
        });
        let loops = concentric_loops(&ring, 10.0).unwrap();
        let level0: Vec<_> = loops.iter().filter(|l| l.level == 0).collect();
        assert_eq!(level0.len(), 2);
        assert!(level0.iter().any(|l| l.is_hole));
    }

    #[test]
    fn one_stroke_band_gives_single_loop() {
        let band = BinaryMask::from_fn(60, 40, 1.0, |x, y| (5..55).contains(&x) && (10..31).contains(&y));
        let loops = concentric_loops(&band, 10.0).unwrap();
        assert_eq!(loops.len(), 1);
    }

    #[test]
    fn thin_curve_rejected() {
        let bar = BinaryMask::from_fn(40, 10, 1.0, |_, y| (4..7).contains(&y));
        assert_eq!(concentric_loops(&bar, 10.0), Err(PlannerError::NotEnclosed));
    }
}
