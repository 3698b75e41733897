use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::geom::{point_segment_distance, polyline_length, Point2, Vector2};

/// Polyline in pixel coordinates, before mapping to the plate.
#[derive(Debug, Clone, PartialEq)]
pub struct PixelStroke {
    pub points: Vec<Point2>,
    pub closed: bool,
}

fn to_points(pixels: Vec<(usize, usize)>) -> Vec<Point2> {
    pixels.into_iter().map(|(x, y)| Point2::new(x as f64, y as f64)).collect()
}

impl PixelStroke {
    pub fn open(pixels: Vec<(usize, usize)>) -> Self {
        Self {
            points: to_points(pixels),
            closed: false,
        }
    }

    pub fn closed(pixels: Vec<(usize, usize)>) -> Self {
        Self {
            points: to_points(pixels),
            closed: true,
        }
    }

    /// A one-point stroke becomes an open dab from `p - half` to `p + half`.
    pub fn expand_dot(self, half: Vector2) -> Self {
        if self.points.len() != 1 {
            return self;
        }
        let p = self.points[0];
        Self {
            points: vec![p - half, p + half],
            closed: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stroke {
    pub points: Vec<Point2>,
    /// The segment from the last point back to the first is implied.
    pub closed: bool,
}

impl Stroke {
    pub fn length(&self) -> f64 {
        let open = polyline_length(&self.points);
        if self.closed && self.points.len() > 1 {
            open + (self.points[0] - self.points[self.points.len() - 1]).norm()
        } else {
            open
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub strokes: Vec<Stroke>,
    /// m
    pub stroke_width: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StrokeJson {
    closed: bool,
    points: Vec<[f64; 2]>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TrajectoryJson {
    stroke_width_m: f64,
    strokes: Vec<StrokeJson>,
}

impl Trajectory {
    pub fn total_length(&self) -> f64 {
        self.strokes.iter().map(Stroke::length).sum()
    }

    pub fn to_json(&self) -> String {
        let j = TrajectoryJson {
            stroke_width_m: self.stroke_width,
            strokes: self
                .strokes
                .iter()
                .map(|s| StrokeJson {
                    closed: s.closed,
                    points: s.points.iter().map(|p| [p.x, p.y]).collect(),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&j).expect("trajectory serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, String> {
        let j: TrajectoryJson = serde_json::from_str(text).map_err(|e| format!("trajectory json: {e}"))?;
        if !(j.stroke_width_m > 0.0) {
            return Err("trajectory json: stroke_width_m must be positive".into());
        }
        let strokes = j
            .strokes
            .into_iter()
            .enumerate()
            .map(|(i, s)| {
                if s.points.len() < 2 {
                    return Err(format!("trajectory json: stroke {i} has fewer than 2 points"));
                }
                Ok(Stroke {
                    points: s.points.iter().map(|p| Point2::new(p[0], p[1])).collect(),
                    closed: s.closed,
                })
            })
            .collect::<Result<_, _>>()?;
        Ok(Self {
            strokes,
            stroke_width: j.stroke_width_m,
        })
    }

    /// Preview with strokes drawn at their real width, pen-up moves dashed.
    pub fn to_svg(&self) -> String {
        let pts = self.strokes.iter().flat_map(|s| s.points.iter());
        let (mut lo, mut hi) = (Point2::new(f64::MAX, f64::MAX), Point2::new(f64::MIN, f64::MIN));
        for p in pts {
            lo = Point2::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Point2::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        if self.strokes.is_empty() {
            lo = Point2::origin();
            hi = Point2::origin();
        }
        let m = self.stroke_width;
        // millimetres keep the numbers readable
        let k = 1000.0;
        let mut svg = String::new();
        let _ = writeln!(
            svg,
            r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{:.3} {:.3} {:.3} {:.3}">"#,
            (lo.x - m) * k,
            (lo.y - m) * k,
            (hi.x - lo.x + 2.0 * m) * k,
            (hi.y - lo.y + 2.0 * m) * k
        );
        let mut prev: Option<Point2> = None;
        for s in &self.strokes {
            if let Some(p) = prev {
                let q = s.points[0];
                let _ = writeln!(
                    svg,
                    r#"  <line x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}" stroke="gray" stroke-width="0.5" stroke-dasharray="2 2"/>"#,
                    p.x * k, p.y * k, q.x * k, q.y * k
                );
            }
            let coords: Vec<String> = s.points.iter().map(|p| format!("{:.3},{:.3}", p.x * k, p.y * k)).collect();
            let tag = if s.closed { "polygon" } else { "polyline" };
            let _ = writeln!(
                svg,
                r##"  <{tag} points="{}" fill="none" stroke="#d9a441" stroke-opacity="0.6" stroke-width="{:.3}" stroke-linejoin="round" stroke-linecap="round"/>"##,
                coords.join(" "),
                self.stroke_width * k
            );
            prev = Some(if s.closed { s.points[0] } else { *s.points.last().expect("nonempty") });
        }
        svg.push_str("</svg>\n");
        svg
    }
}

/// Douglas–Peucker on an open polyline; endpoints are always kept.
pub fn douglas_peucker(points: &[Point2], tolerance: f64) -> Vec<Point2> {
    if points.len() <= 2 {
        return points.to_vec();
    }
    let mut keep = vec![false; points.len()];
    keep[0] = true;
    keep[points.len() - 1] = true;
    let mut stack = vec![(0, points.len() - 1)];
    while let Some((a, b)) = stack.pop() {
        let (mut far, mut far_d) = (a, 0.0);
        for i in a + 1..b {
            let d = point_segment_distance(&points[i], &points[a], &points[b]);
            if d > far_d {
                far = i;
                far_d = d;
            }
        }
        if far_d > tolerance {
            keep[far] = true;
            stack.push((a, far));
            stack.push((far, b));
        }
    }
    points.iter().zip(keep).filter(|(_, k)| *k).map(|(p, _)| *p).collect()
}

fn simplify_closed(points: &[Point2], tolerance: f64) -> Vec<Point2> {
    if points.len() <= 3 {
        return points.to_vec();
    }
    // split at the vertex farthest from the first one
    let far = (1..points.len())
        .max_by(|&i, &j| {
            (points[i] - points[0])
                .norm_squared()
                .total_cmp(&(points[j] - points[0]).norm_squared())
                .then(j.cmp(&i))
        })
        .expect("at least two points");
    let mut first: Vec<Point2> = douglas_peucker(&points[..=far], tolerance);
    let mut back: Vec<Point2> = points[far..].to_vec();
    back.push(points[0]);
    let second = douglas_peucker(&back, tolerance);
    first.extend_from_slice(&second[1..second.len() - 1]);
    first
}

fn dedup(points: &mut Vec<Point2>, closed: bool) {
    points.dedup_by(|a, b| a == b);
    if closed && points.len() > 1 && points[0] == points[points.len() - 1] {
        points.pop();
    }
}

/// Maps pixel strokes to plate coordinates, `origin + pixel * scale`,
/// optionally simplifying each stroke to 0.5 px first.
pub fn to_world(strokes: &[PixelStroke], scale: f64, origin: Point2, stroke_width: f64, simplify: bool) -> Trajectory {
    let strokes = strokes
        .iter()
        .filter_map(|s| {
            let mut pts = s.points.clone();
            dedup(&mut pts, s.closed);
            if simplify {
                pts = if s.closed {
                    simplify_closed(&pts, 0.5)
                } else {
                    douglas_peucker(&pts, 0.5)
                };
            }
            (pts.len() >= 2).then(|| Stroke {
                points: pts.iter().map(|p| origin + p.coords * scale).collect(),
                closed: s.closed,
            })
        })
        .collect();
    Trajectory {
        strokes,
        stroke_width,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn affine_map() {
        let t = to_world(&[PixelStroke::open(vec![(10, 20), (11, 20)])], 1e-3, Point2::origin(), 0.01, false);
        assert!((t.strokes[0].points[0] - Point2::new(0.010, 0.020)).norm() < 1e-15);
    }

    #[test]
    fn collinear_run_simplifies_to_endpoints() {
        let pts: Vec<_> = (0..10).map(|i| Point2::new(i as f64, 2.0 * i as f64)).collect();
        assert_eq!(douglas_peucker(&pts, 0.5), vec![pts[0], pts[9]]);
    }

    #[test]
    fn json_round_trip() {
        let t = Trajectory {
            strokes: vec![
                Stroke {
                    points: vec![Point2::new(0.0, 0.0), Point2::new(0.01, 0.0), Point2::new(0.01, 0.01)],
                    closed: true,
                },
                Stroke {
                    points: vec![Point2::new(0.05, 0.0), Point2::new(0.06, 0.0)],
                    closed: false,
                },
            ],
            stroke_width: 0.01,
        };
        let text = t.to_json();
        assert!(text.contains("stroke_width_m"));
        assert_eq!(Trajectory::from_json(&text).unwrap(), t);
        assert!(t.to_svg().starts_with("<svg"));
        assert!(Trajectory::from_json(r#"{"stroke_width_m":0.01,"strokes":[{"closed":false,"points":[[0,0]]}]}"#).is_err());
    }

    #[test]
    fn dot_expands() {
        let s = PixelStroke::open(vec![(3, 3)]).expand_dot(Vector2::new(2.5, 0.0));
        assert_eq!(s.points, vec![Point2::new(0.5, 3.0), Point2::new(5.5, 3.0)]);
    }
}
