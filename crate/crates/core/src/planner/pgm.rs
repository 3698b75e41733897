use std::path::Path;

use super::{BinaryMask, PlannerError, Result};

/// 1 mm per pixel unless the caller says otherwise.
pub const DEFAULT_PIXEL_SCALE: f64 = 1e-3;

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    fn err<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(PlannerError::Pgm {
            offset: self.pos,
            message: message.into(),
        })
    }

    fn skip_space(&mut self) {
        while self.pos < self.bytes.len() {
            match self.bytes[self.pos] {
                b'#' => {
                    while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                c if c.is_ascii_whitespace() => self.pos += 1,
                _ => break,
            }
        }
    }

    fn number(&mut self) -> Result<u32> {
        self.skip_space();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return self.err("expected a decimal number");
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .map_or_else(|| self.err("number out of range"), Ok)
    }
}

/// Parses a P2 or P5 graymap. Pixels at or above half of 255 (scaled by
/// maxval) are foreground.
pub fn parse_pgm(bytes: &[u8]) -> Result<BinaryMask> {
    let gray = parse_gray(bytes)?;
    let (w, h, maxval, values) = gray;
    let mut i = 0;
    Ok(BinaryMask::from_fn(w, h, DEFAULT_PIXEL_SCALE, |_, _| {
        let v = values[i];
        i += 1;
        v as u64 * 255 >= 128 * maxval as u64
    }))
}

fn parse_gray(bytes: &[u8]) -> Result<(usize, usize, u32, Vec<u32>)> {
    let mut c = Cursor { bytes, pos: 0 };
    let binary = match bytes.get(..2) {
        Some(b"P2") => false,
        Some(b"P5") => true,
        _ => return c.err("not a PGM file (magic must be P2 or P5)"),
    };
    c.pos = 2;
    let w = c.number()? as usize;
    let h = c.number()? as usize;
    let maxval = c.number()?;
    if w == 0 || h == 0 {
        return c.err("image dimensions must be positive");
    }
    if maxval == 0 || maxval > 65535 {
        return c.err("maxval must be in 1..=65535");
    }
    let n = w * h;
    let mut values = Vec::with_capacity(n);
    if binary {
        if c.pos >= bytes.len() || !bytes[c.pos].is_ascii_whitespace() {
            return c.err("expected one whitespace byte before raster");
        }
        c.pos += 1;
        let bpp = if maxval < 256 { 1 } else { 2 };
        if bytes.len() < c.pos + n * bpp {
            c.pos = bytes.len();
            return c.err(format!("raster truncated, expected {} bytes", n * bpp));
        }
        for k in 0..n {
            let at = c.pos + k * bpp;
            values.push(if bpp == 1 {
                bytes[at] as u32
            } else {
                (bytes[at] as u32) << 8 | bytes[at + 1] as u32
            });
        }
    } else {
        for _ in 0..n {
            values.push(c.number()?);
        }
    }
    if let Some(&v) = values.iter().find(|&&v| v > maxval) {
        return c.err(format!("sample {v} exceeds maxval {maxval}"));
    }
    Ok((w, h, maxval, values))
}

pub fn load_pgm(path: impl AsRef<Path>) -> Result<BinaryMask> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| PlannerError::Io(format!("{}: {e}", path.display())))?;
    parse_pgm(&bytes)
}

/// Writes a binary P5 file with foreground 255 and background 0.
pub fn save_pgm(mask: &BinaryMask, path: impl AsRef<Path>) -> Result<()> {
    let gray: Vec<u8> = (0..mask.height())
        .flat_map(|y| (0..mask.width()).map(move |x| (x, y)))
        .map(|(x, y)| if mask.get(x, y) { 255 } else { 0 })
        .collect();
    write_gray_pgm(mask.width(), mask.height(), &gray, path)
}

pub fn write_gray_pgm(width: usize, height: usize, gray: &[u8], path: impl AsRef<Path>) -> Result<()> {
    assert_eq!(gray.len(), width * height, "raster size mismatch");
    let mut out = format!("P5\n{width} {height}\n255\n").into_bytes();
    out.extend_from_slice(gray);
    let path = path.as_ref();
    std::fs::write(path, out).map_err(|e| PlannerError::Io(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ascii_checkerboard() {
        let m = parse_pgm(b"P2 2 2 255\n0 255\n255 0\n").unwrap();
        assert!(!m.get(0, 0) && m.get(1, 0) && m.get(0, 1) && !m.get(1, 1));
    }

    #[test]
    fn comments_and_binary() {
        let mut bytes = b"P5\n# made by hand\n3 1\n255\n".to_vec();
        bytes.extend([0, 128, 127]);
        let m = parse_pgm(&bytes).unwrap();
        assert!(!m.get(0, 0) && m.get(1, 0) && !m.get(2, 0));
    }

    #[test]
    fn bad_magic_reports_offset() {
        match parse_pgm(b"P6 1 1 255\n\0") {
            Err(PlannerError::Pgm { offset, .. }) => assert_eq!(offset, 0),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_pgm(b"P2 2 x"), Err(PlannerError::Pgm { offset: 5, .. })));
        assert!(parse_pgm(b"P5 2 2 255\n\0").is_err());
    }

    #[test]
    fn save_load_round_trip() {
        let m = BinaryMask::from_fn(7, 5, DEFAULT_PIXEL_SCALE, |x, y| (x * 3 + y) % 4 == 0);
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.pgm");
        save_pgm(&m, &p).unwrap();
        assert_eq!(load_pgm(&p).unwrap(), m);
    }
}
