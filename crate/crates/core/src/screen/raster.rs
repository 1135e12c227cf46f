//! Plain (ASCII, `P2`) portable graymap reading and writing.

use std::fmt::Write as _;

use super::{ScreenError, ScreenRaster};

const MAX_LINE: usize = 70;

/// Serializes a raster as a plain graymap with maxval 255.
///
/// Sample lines are wrapped so no line exceeds 70 characters.
pub fn write_pgm(raster: &ScreenRaster) -> String {
    let mut out = String::with_capacity(raster.pixels().len() * 3 + 32);
    let _ = write!(out, "P2\n{} {}\n255\n", raster.width(), raster.height());
    for row in raster.pixels().chunks(raster.width() as usize) {
        let mut line_len = 0;
        for (i, v) in row.iter().enumerate() {
            let s = v.to_string();
            if i > 0 {
                if line_len + 1 + s.len() > MAX_LINE {
                    out.push('\n');
                    line_len = 0;
                } else {
                    out.push(' ');
                    line_len += 1;
                }
            }
            out.push_str(&s);
            line_len += s.len();
        }
        out.push('\n');
    }
    out
}

/// Parses a plain graymap. Comments (`#` to end of line) are allowed
/// anywhere whitespace is; samples are rescaled to 0..=255 when maxval
/// differs.
pub fn read_pgm(src: &str) -> Result<ScreenRaster, ScreenError> {
    let mut tokens = src.lines().map(|l| l.split('#').next().unwrap_or("")).flat_map(str::split_whitespace);
    let magic = tokens.next().ok_or_else(|| ScreenError::Pgm("empty file".into()))?;
    if magic != "P2" {
        return Err(ScreenError::Pgm(format!("expected magic P2, found {magic:?}")));
    }
    let mut header = |name: &str| -> Result<u32, ScreenError> {
        let t = tokens.next().ok_or_else(|| ScreenError::Pgm(format!("missing {name}")))?;
        t.parse::<u32>().map_err(|_| ScreenError::Pgm(format!("bad {name} {t:?}")))
    };
    let width = header("width")?;
    let height = header("height")?;
    let maxval = header("maxval")?;
    if maxval == 0 || maxval > 65535 {
        return Err(ScreenError::Pgm(format!("maxval {maxval} out of range")));
    }
    let expected = width as usize * height as usize;
    let mut pixels = Vec::with_capacity(expected);
    for t in tokens {
        let v: u32 = t.parse().map_err(|_| ScreenError::Pgm(format!("bad sample {t:?}")))?;
        if v > maxval {
            return Err(ScreenError::Pgm(format!("sample {v} exceeds maxval {maxval}")));
        }
        let scaled = if maxval == 255 { v } else { (v * 255 + maxval / 2) / maxval };
        pixels.push(scaled as u8);
    }
    if pixels.len() != expected {
        return Err(ScreenError::Pgm(format!("{} samples for a {width}x{height} image", pixels.len())));
    }
    ScreenRaster::new(width, height, pixels)
}
