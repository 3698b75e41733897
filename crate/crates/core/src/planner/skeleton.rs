use super::BinaryMask;

/// `P2..P9` in the usual Zhang–Suen numbering: N, NE, E, SE, S, SW, W, NW.
fn ring(m: &BinaryMask, x: usize, y: usize) -> [bool; 8] {
    let (x, y) = (x as i64, y as i64);
    [
        m.get_i(x, y - 1),
        m.get_i(x + 1, y - 1),
        m.get_i(x + 1, y),
        m.get_i(x + 1, y + 1),
        m.get_i(x, y + 1),
        m.get_i(x - 1, y + 1),
        m.get_i(x - 1, y),
        m.get_i(x - 1, y - 1),
    ]
}

/// Yokoi 8-connectivity number; 1 means deleting the pixel keeps topology.
fn connectivity_number(p: &[bool; 8]) -> usize {
    // odd entries of `p` (index 0, 2, 4, 6) are the 4-neighbours
    let off = |i: usize| !p[i % 8];
    (0..4)
        .map(|k| 2 * k)
        .filter(|&i| off(i) && !(off(i) && off(i + 1) && off(i + 2)))
        .count()
}

fn zhang_suen_pass(m: &mut BinaryMask, second: bool) -> bool {
    let mut doomed = Vec::new();
    for (x, y) in m.foreground() {
        let p = ring(m, x, y);
        let b = p.iter().filter(|&&v| v).count();
        let a = (0..8).filter(|&i| !p[i] && p[(i + 1) % 8]).count();
        let (n, e, s, w) = (p[0], p[2], p[4], p[6]);
        let cond = if second {
            !(n && e && w) && !(n && s && w)
        } else {
            !(n && e && s) && !(e && s && w)
        };
        if (2..=6).contains(&b) && a == 1 && cond {
            doomed.push((x, y));
        }
    }
    if doomed.is_empty() {
        return false;
    }
    // never let a whole component disappear: spare its first pixel
    let (labels, n) = m.components();
    let w = m.width();
    let mut size = vec![0usize; n];
    for &l in labels.iter().filter(|&&l| l != usize::MAX) {
        size[l] += 1;
    }
    let mut hit = vec![0usize; n];
    for &(x, y) in &doomed {
        hit[labels[y * w + x]] += 1;
    }
    let mut spared = vec![false; n];
    for (x, y) in doomed {
        let l = labels[y * w + x];
        if hit[l] == size[l] && !spared[l] {
            spared[l] = true;
            continue;
        }
        m.set(x, y, false);
    }
    true
}

/// Removes simple pixels that sit in a fully set 2×2 block, in raster order.
fn block_pass(m: &mut BinaryMask) -> bool {
    let mut changed = false;
    let pixels: Vec<_> = m.foreground().collect();
    for (x, y) in pixels {
        if !m.get(x, y) {
            continue;
        }
        let (xi, yi) = (x as i64, y as i64);
        let in_block = [(-1, -1), (0, -1), (-1, 0), (0, 0)].iter().any(|&(dx, dy)| {
            (0..2).all(|i| (0..2).all(|j| m.get_i(xi + dx + i, yi + dy + j)))
        });
        if !in_block {
            continue;
        }
        let p = ring(m, x, y);
        if p.iter().filter(|&&v| v).count() >= 2 && connectivity_number(&p) == 1 {
            m.set(x, y, false);
            changed = true;
        }
    }
    changed
}

/// Zhang–Suen thinning, iterated together with a 2×2-block cleanup until
/// nothing changes. The result is a subset of the input, keeps the number of
/// 8-connected components and is its own skeleton.
pub fn skeletonize(mask: &BinaryMask) -> BinaryMask {
    let mut m = mask.clone();
    loop {
        let mut changed = false;
        loop {
            let a = zhang_suen_pass(&mut m, false);
            let b = zhang_suen_pass(&mut m, true);
            if !(a || b) {
                break;
            }
            changed = true;
        }
        changed |= block_pass(&mut m);
        if !changed {
            return m;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn has_block(m: &BinaryMask) -> bool {
        (0..m.height() as i64).any(|y| {
            (0..m.width() as i64).any(|x| {
                m.get_i(x, y) && m.get_i(x + 1, y) && m.get_i(x, y + 1) && m.get_i(x + 1, y + 1)
            })
        })
    }

    #[test]
    fn bar_thins_to_line() {
        let bar = BinaryMask::from_fn(30, 11, 1.0, |x, y| (3..27).contains(&x) && (3..8).contains(&y));
        let s = skeletonize(&bar);
        assert!(s.is_subset_of(&bar));
        assert!(!has_block(&s));
        assert_eq!(s.component_count(), 1);
        let rows: std::collections::BTreeSet<_> = s.foreground().map(|(_, y)| y).collect();
        assert_eq!(rows.len(), 1, "{rows:?}");
        assert!(s.count() >= 15);
    }

    #[test]
    fn thin_line_is_fixed_point() {
        let line = BinaryMask::from_fn(20, 20, 1.0, |x, y| x == y || (y == 5 && x < 5));
        assert_eq!(skeletonize(&line), line);
    }

    #[test]
    fn keeps_components() {
        let m = BinaryMask::from_fn(40, 40, 1.0, |x, y| {
            ((2..12).contains(&x) && (2..12).contains(&y))
                || ((20..22).contains(&x) && (20..22).contains(&y))
                || ((15..38).contains(&x) && (30..35).contains(&y))
        });
        let s = skeletonize(&m);
        assert_eq!(s.component_count(), 3);
        assert!(!has_block(&s));
        assert_eq!(skeletonize(&s), s);
    }
}
