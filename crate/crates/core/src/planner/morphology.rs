use super::BinaryMask;

const INF: f64 = 1e20;

/// Felzenszwalb–Huttenlocher 1D squared distance transform of `f` in place.
fn dt_1d(f: &mut [f64], v: &mut Vec<usize>, z: &mut Vec<f64>, out: &mut Vec<f64>) {
    let n = f.len();
    v.clear();
    v.resize(n, 0);
    z.clear();
    z.resize(n + 1, 0.0);
    out.clear();
    let parabola = |f: &[f64], q: usize, p: usize| {
        ((f[q] + (q * q) as f64) - (f[p] + (p * p) as f64)) / (2.0 * q as f64 - 2.0 * p as f64)
    };
    let mut k = 0;
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    for q in 1..n {
        let mut s = parabola(f, q, v[k]);
        while s <= z[k] {
            k -= 1;
            s = parabola(f, q, v[k]);
        }
        k += 1;
        v[k] = q;
        z[k] = s;
        z[k + 1] = f64::INFINITY;
    }
    k = 0;
    for q in 0..n {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let d = q as f64 - v[k] as f64;
        out.push(d * d + f[v[k]]);
    }
    f.copy_from_slice(out);
}

/// Exact squared Euclidean distance from each pixel to the nearest pixel where
/// `source` holds, computed on a one-pixel border that is a source iff
/// `border_is_source`. Row-major, `width * height` entries.
fn edt(width: usize, height: usize, source: impl Fn(usize, usize) -> bool, border_is_source: bool) -> Vec<f64> {
    let (pw, ph) = (width + 2, height + 2);
    let mut g = vec![0.0; pw * ph];
    for y in 0..ph {
        for x in 0..pw {
            let inside = x >= 1 && y >= 1 && x <= width && y <= height;
            let src = if inside { source(x - 1, y - 1) } else { border_is_source };
            g[y * pw + x] = if src { 0.0 } else { INF };
        }
    }
    let (mut v, mut z, mut out) = (Vec::new(), Vec::new(), Vec::new());
    let mut col = vec![0.0; ph];
    for x in 0..pw {
        for y in 0..ph {
            col[y] = g[y * pw + x];
        }
        dt_1d(&mut col, &mut v, &mut z, &mut out);
        for y in 0..ph {
            g[y * pw + x] = col[y];
        }
    }
    for y in 0..ph {
        dt_1d(&mut g[y * pw..(y + 1) * pw], &mut v, &mut z, &mut out);
    }
    let mut res = Vec::with_capacity(width * height);
    for y in 1..=height {
        res.extend_from_slice(&g[y * pw + 1..y * pw + 1 + width]);
    }
    res
}

/// Squared distance from each pixel to the nearest background pixel, with
/// everything outside the raster counting as background.
pub fn squared_distance_transform(mask: &BinaryMask) -> Vec<f64> {
    edt(mask.width(), mask.height(), |x, y| !mask.get(x, y), true)
}

/// Erosion by a Euclidean disk: a pixel survives iff no background pixel lies
/// within `radius` of it.
pub fn erode(mask: &BinaryMask, radius: f64) -> BinaryMask {
    let d2 = squared_distance_transform(mask);
    let r2 = radius * radius;
    let w = mask.width();
    BinaryMask::from_fn(w, mask.height(), mask.scale, |x, y| d2[y * w + x] > r2)
}

/// Dilation by a Euclidean disk of `radius`.
pub fn dilate(mask: &BinaryMask, radius: f64) -> BinaryMask {
    let d2 = edt(mask.width(), mask.height(), |x, y| mask.get(x, y), false);
    let r2 = radius * radius;
    let w = mask.width();
    BinaryMask::from_fn(w, mask.height(), mask.scale, |x, y| d2[y * w + x] <= r2)
}
