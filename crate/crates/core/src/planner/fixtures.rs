use super::{BinaryMask, DEFAULT_PIXEL_SCALE};
use crate::geom::{point_in_polygon, Point2};

/// Stroke width the fixture shapes are drawn for, px.
pub const FIXTURE_STROKE_PX: f64 = 10.0;

fn dist(x: usize, y: usize, cx: f64, cy: f64) -> f64 {
    (x as f64 - cx).hypot(y as f64 - cy)
}

fn disk() -> BinaryMask {
    BinaryMask::from_fn(100, 100, DEFAULT_PIXEL_SCALE, |x, y| dist(x, y, 50.0, 50.0) <= 40.0)
}

fn annulus() -> BinaryMask {
    BinaryMask::from_fn(100, 100, DEFAULT_PIXEL_SCALE, |x, y| {
        let d = dist(x, y, 50.0, 50.0);
        d <= 45.0 && d > 20.0
    })
}

fn star() -> BinaryMask {
    let poly: Vec<Point2> = (0..10)
        .map(|i| {
            let r = if i % 2 == 0 { 55.0 } else { 30.0 };
            let a = -std::f64::consts::FRAC_PI_2 + i as f64 * std::f64::consts::PI / 5.0;
            Point2::new(60.0 + r * a.cos(), 62.0 + r * a.sin())
        })
        .collect();
    BinaryMask::from_fn(120, 120, DEFAULT_PIXEL_SCALE, |x, y| {
        point_in_polygon(&Point2::new(x as f64, y as f64), &poly)
    })
}

fn block_letter() -> BinaryMask {
    // a sans-serif "T"
    BinaryMask::from_fn(100, 110, DEFAULT_PIXEL_SCALE, |x, y| {
        ((10..90).contains(&x) && (10..34).contains(&y)) || ((38..62).contains(&x) && (34..100).contains(&y))
    })
}

fn smiley() -> BinaryMask {
    let half = FIXTURE_STROKE_PX / 2.0;
    BinaryMask::from_fn(120, 120, DEFAULT_PIXEL_SCALE, |x, y| {
        let face = (dist(x, y, 60.0, 60.0) - 50.0).abs() < half;
        let eyes = dist(x, y, 42.0, 45.0) < half || dist(x, y, 78.0, 45.0) < half;
        let (dx, dy) = (x as f64 - 60.0, y as f64 - 60.0);
        let angle = dy.atan2(dx).to_degrees();
        let mouth = (dist(x, y, 60.0, 60.0) - 28.0).abs() < half && (25.0..=155.0).contains(&angle);
        face || eyes || mouth
    })
}

/// Disk, annulus, star, block letter and smiley line art, at 1 mm per pixel.
pub fn fixture_corpus() -> Vec<(&'static str, BinaryMask)> {
    vec![
        ("disk", disk()),
        ("annulus", annulus()),
        ("star", star()),
        ("letter", block_letter()),
        ("smiley", smiley()),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::planner::{classify_shape, ShapeClass};

    #[test]
    fn corpus_classes() {
        let classes: Vec<_> = fixture_corpus()
            .iter()
            .map(|(_, m)| classify_shape(m, FIXTURE_STROKE_PX).unwrap())
            .collect();
        use ShapeClass::*;
        assert_eq!(classes, [Enclosed, Enclosed, Enclosed, Enclosed, OpenLines]);
    }
}
