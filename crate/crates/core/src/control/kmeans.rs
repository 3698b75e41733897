use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{ControlError, Result};
use crate::planner::BinaryMask;

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansResult {
    pub labels: Vec<usize>,
    pub centroids: Vec<Vec<f64>>,
    /// Inertia after seeding and after each Lloyd iteration.
    pub inertia_history: Vec<f64>,
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum()
}

fn nearest(p: &[f64], centroids: &[Vec<f64>]) -> (usize, f64) {
    centroids
        .iter()
        .enumerate()
        .map(|(i, c)| (i, dist2(p, c)))
        .fold((0, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best })
}

/// k-means++ seeding followed by Lloyd iterations until the labels stop
/// changing or `max_iters` is reached. Empty clusters keep their centroid.
pub fn kmeans(points: &[Vec<f64>], k: usize, max_iters: usize, seed: u64) -> Result<KMeansResult> {
    if k == 0 {
        return Err(ControlError::InvalidParameter("k must be at least 1".into()));
    }
    if points.len() < k {
        return Err(ControlError::TooFewPoints { k, points: points.len() });
    }
    let dim = points[0].len();
    if points.iter().any(|p| p.len() != dim || p.iter().any(|v| !v.is_finite())) {
        return Err(ControlError::NonFiniteInput);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids = vec![points[rng.gen_range(0..points.len())].clone()];
    let mut d2: Vec<f64> = points.iter().map(|p| dist2(p, &centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let mut target = rng.gen::<f64>() * total;
            d2.iter()
                .position(|&d| {
                    target -= d;
                    target < 0.0
                })
                .unwrap_or(points.len() - 1)
        } else {
            rng.gen_range(0..points.len())
        };
        centroids.push(points[next].clone());
        for (d, p) in d2.iter_mut().zip(points) {
            *d = d.min(dist2(p, &centroids[centroids.len() - 1]));
        }
    }

    let assign = |centroids: &[Vec<f64>]| -> (Vec<usize>, f64) {
        let mut inertia = 0.0;
        let labels = points
            .iter()
            .map(|p| {
                let (i, d) = nearest(p, centroids);
                inertia += d;
                i
            })
            .collect();
        (labels, inertia)
    };
    let (mut labels, inertia) = assign(&centroids);
    let mut history = vec![inertia];
    for _ in 0..max_iters {
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (p, &l) in points.iter().zip(&labels) {
            counts[l] += 1;
            for (s, v) in sums[l].iter_mut().zip(p) {
                *s += v;
            }
        }
        for c in 0..k {
            if counts[c] > 0 {
                centroids[c] = sums[c].iter().map(|s| s / counts[c] as f64).collect();
            }
        }
        let (next, inertia) = assign(&centroids);
        history.push(inertia);
        let done = next == labels;
        labels = next;
        if done {
            break;
        }
    }
    Ok(KMeansResult {
        labels,
        centroids,
        inertia_history: history,
    })
}

/// Two-cluster intensity segmentation of a grayscale frame; the brighter
/// cluster is batter.
pub fn segment_batter(gray: &[u8], width: usize, height: usize, seed: u64) -> Result<BinaryMask> {
    if gray.len() != width * height {
        return Err(ControlError::InvalidParameter("frame size mismatch".into()));
    }
    let points: Vec<Vec<f64>> = gray.iter().map(|&g| vec![g as f64]).collect();
    let res = kmeans(&points, 2, 50, seed)?;
    let bright = if res.centroids[1][0] > res.centroids[0][0] { 1 } else { 0 };
    let mut i = 0;
    Ok(BinaryMask::from_fn(width, height, 1.0, |_, _| {
        let on = res.labels[i] == bright;
        i += 1;
        on
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::render_gray_frame;

    #[test]
    fn separates_two_blobs() {
        let mut pts = Vec::new();
        for i in 0..20 {
            pts.push(vec![i as f64 * 0.01, 0.0]);
            pts.push(vec![10.0 + i as f64 * 0.01, 5.0]);
        }
        let r = kmeans(&pts, 2, 100, 4).unwrap();
        for i in 0..20 {
            assert_eq!(r.labels[2 * i], r.labels[0]);
            assert_eq!(r.labels[2 * i + 1], r.labels[1]);
        }
        assert_ne!(r.labels[0], r.labels[1]);
    }

    #[test]
    fn single_cluster_is_mean() {
        let pts = vec![vec![1.0, 2.0], vec![3.0, 6.0], vec![5.0, 1.0]];
        let r = kmeans(&pts, 1, 10, 0).unwrap();
        assert!((r.centroids[0][0] - 3.0).abs() < 1e-12 && (r.centroids[0][1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn inertia_never_increases() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let pts: Vec<Vec<f64>> = (0..200).map(|_| vec![rng.gen(), rng.gen(), rng.gen()]).collect();
        let r = kmeans(&pts, 5, 100, 1).unwrap();
        assert!(r.inertia_history.windows(2).all(|w| w[1] <= w[0] + 1e-12));
        assert_eq!(kmeans(&pts[..2], 3, 10, 0), Err(ControlError::TooFewPoints { k: 3, points: 2 }));
    }

    #[test]
    fn recovers_rendered_mask() {
        let m = BinaryMask::from_fn(30, 20, 1.0, |x, y| (5..15).contains(&x) && (3..12).contains(&y));
        let gray = render_gray_frame(&m, 3);
        let s = segment_batter(&gray, 30, 20, 0).unwrap();
        assert_eq!(s.vertical_extent(), m.vertical_extent());
    }
}
