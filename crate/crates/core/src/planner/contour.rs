use serde::{Deserialize, Serialize};

use super::BinaryMask;

/// One traced border, in pixel `(x, y)` coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Border {
    pub points: Vec<(usize, usize)>,
    /// Hole borders separate a component from a background region it encloses.
    pub is_hole: bool,
}

// clockwise with rows growing downwards: E, SE, S, SW, W, NW, N, NE
const DIRS: [(i64, i64); 8] = [(0, 1), (1, 1), (1, 0), (1, -1), (0, -1), (-1, -1), (-1, 0), (-1, 1)];

fn dir_of(from: (i64, i64), to: (i64, i64)) -> usize {
    let d = (to.0 - from.0, to.1 - from.1);
    DIRS.iter().position(|&x| x == d).expect("neighbouring pixels")
}

/// Suzuki–Abe border following with 8-connectivity. Borders come out in the
/// raster order of their starting pixels, outer and hole borders alike.
pub fn trace_borders(mask: &BinaryMask) -> Vec<Border> {
    let (w, h) = (mask.width() as i64 + 2, mask.height() as i64 + 2);
    let mut f: Vec<i64> = (0..h)
        .flat_map(|i| (0..w).map(move |j| (i, j)))
        .map(|(i, j)| i64::from(mask.get_i(j - 1, i - 1)))
        .collect();
    let idx = |(i, j): (i64, i64)| (i * w + j) as usize;
    let mut nbd = 1;
    let mut borders = Vec::new();

    for i in 1..h - 1 {
        for j in 1..w - 1 {
            let v = f[idx((i, j))];
            let start = if v == 1 && f[idx((i, j - 1))] == 0 {
                Some(((i, j - 1), false))
            } else if v >= 1 && f[idx((i, j + 1))] == 0 {
                Some(((i, j + 1), true))
            } else {
                None
            };
            let Some((from, is_hole)) = start else { continue };
            nbd += 1;
            let p0 = (i, j);
            let to_xy = |p: (i64, i64)| ((p.1 - 1) as usize, (p.0 - 1) as usize);

            // 3.1: clockwise from `from` for any nonzero neighbour
            let d0 = dir_of(p0, from);
            let p1 = (0..8)
                .map(|k| DIRS[(d0 + k) % 8])
                .map(|(di, dj)| (i + di, j + dj))
                .find(|&q| f[idx(q)] != 0);
            let Some(p1) = p1 else {
                f[idx(p0)] = -nbd;
                borders.push(Border {
                    points: vec![to_xy(p0)],
                    is_hole,
                });
                continue;
            };

            let mut points = Vec::new();
            let (mut p2, mut p3) = (p1, p0);
            loop {
                points.push(to_xy(p3));
                // 3.3: counterclockwise from the element after p2
                let d = dir_of(p3, p2);
                let mut east_zero = false;
                let mut p4 = p3;
                for k in 1..=8 {
                    let dd = (d + 8 - k) % 8;
                    let q = (p3.0 + DIRS[dd].0, p3.1 + DIRS[dd].1);
                    if f[idx(q)] != 0 {
                        p4 = q;
                        break;
                    }
                    if dd == 0 {
                        east_zero = true;
                    }
                }
                // 3.4
                if east_zero {
                    f[idx(p3)] = -nbd;
                } else if f[idx(p3)] == 1 {
                    f[idx(p3)] = nbd;
                }
                // 3.5
                if p4 == p0 && p3 == p1 {
                    break;
                }
                p2 = p3;
                p3 = p4;
            }
            borders.push(Border { points, is_hole });
        }
    }
    borders
}
