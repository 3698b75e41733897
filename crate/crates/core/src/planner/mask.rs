use serde::{Deserialize, Serialize};

/// Row-major binary raster. `x` is the column, `y` the row; out-of-bounds
/// reads are background.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    pixels: Vec<bool>,
    /// Metres per pixel.
    pub scale: f64,
}

impl BinaryMask {
    pub fn new(width: usize, height: usize, scale: f64) -> Self {
        Self {
            width,
            height,
            pixels: vec![false; width * height],
            scale,
        }
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        scale: f64,
        mut f: impl FnMut(usize, usize) -> bool,
    ) -> Self {
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Self {
            width,
            height,
            pixels,
            scale,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        x < self.width && y < self.height && self.pixels[y * self.width + x]
    }

    /// Signed lookup, background outside the raster.
    pub fn get_i(&self, x: i64, y: i64) -> bool {
        x >= 0 && y >= 0 && self.get(x as usize, y as usize)
    }

    pub fn set(&mut self, x: usize, y: usize, value: bool) {
        assert!(x < self.width && y < self.height, "pixel ({x}, {y}) out of bounds");
        self.pixels[y * self.width + x] = value;
    }

    pub fn count(&self) -> usize {
        self.pixels.iter().filter(|&&p| p).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.pixels.iter().any(|&p| p)
    }

    /// Foreground pixels in row-major (lexicographic `(y, x)`) order.
    pub fn foreground(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.pixels
            .iter()
            .enumerate()
            .filter(|(_, &p)| p)
            .map(move |(i, _)| (i % self.width, i / self.width))
    }

    /// Pixel-wise `self ⊆ other`.
    pub fn is_subset_of(&self, other: &BinaryMask) -> bool {
        self.width == other.width
            && self.height == other.height
            && self.pixels.iter().zip(&other.pixels).all(|(&a, &b)| !a || b)
    }

    /// Vertical extent `max_row - min_row` of the foreground, `None` if empty.
    pub fn vertical_extent(&self) -> Option<usize> {
        let mut rows = self.foreground().map(|(_, y)| y);
        let first = rows.next()?;
        let last = rows.last().unwrap_or(first);
        Some(last - first)
    }

    /// Mask translated by `dx` columns; pixels pushed outside are dropped.
    pub fn shifted_x(&self, dx: i64) -> BinaryMask {
        BinaryMask::from_fn(self.width, self.height, self.scale, |x, y| {
            self.get_i(x as i64 - dx, y as i64)
        })
    }

    /// Number of 8-connected foreground components.
    pub fn component_count(&self) -> usize {
        self.components().1
    }

    /// Component label per pixel (`usize::MAX` for background) and the number
    /// of 8-connected components. Labels follow row-major discovery order.
    pub fn components(&self) -> (Vec<usize>, usize) {
        let mut labels = vec![usize::MAX; self.pixels.len()];
        let mut next = 0;
        let mut stack = Vec::new();
        for start in 0..self.pixels.len() {
            if !self.pixels[start] || labels[start] != usize::MAX {
                continue;
            }
            labels[start] = next;
            stack.push(start);
            while let Some(i) = stack.pop() {
                let (x, y) = ((i % self.width) as i64, (i / self.width) as i64);
                for (dx, dy) in NEIGHBORS_8 {
                    let (nx, ny) = (x + dx, y + dy);
                    if self.get_i(nx, ny) {
                        let j = ny as usize * self.width + nx as usize;
                        if labels[j] == usize::MAX {
                            labels[j] = next;
                            stack.push(j);
                        }
                    }
                }
            }
            next += 1;
        }
        (labels, next)
    }
}

pub(crate) const NEIGHBORS_8: [(i64, i64); 8] = [
    (1, 0),
    (1, 1),
    (0, 1),
    (-1, 1),
    (-1, 0),
    (-1, -1),
    (0, -1),
    (1, -1),
];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn extent_and_components() {
        let mut m = BinaryMask::new(6, 6, 1e-3);
        m.set(1, 1, true);
        m.set(2, 2, true);
        m.set(5, 5, true);
        assert_eq!(m.vertical_extent(), Some(4));
        assert_eq!(m.component_count(), 2);
        assert_eq!(m.count(), 3);
        assert_eq!(BinaryMask::new(3, 3, 1.0).vertical_extent(), None);
    }

    #[test]
    fn shift_preserves_extent() {
        let m = BinaryMask::from_fn(10, 10, 1.0, |x, y| (3..6).contains(&x) && (2..8).contains(&y));
        let s = m.shifted_x(2);
        assert_eq!(s.vertical_extent(), m.vertical_extent());
        assert!(s.get(7, 4) && !s.get(3, 4));
    }
}
