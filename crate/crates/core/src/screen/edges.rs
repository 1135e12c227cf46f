//! Gradient edges with double-threshold hysteresis, and binary morphology.

use super::ScreenRaster;

/// Sobel magnitude at or above which a pixel is a strong edge.
pub const HIGH_THRESHOLD: f32 = 200.0;
/// Sobel magnitude at or above which a pixel is a weak edge candidate.
pub const LOW_THRESHOLD: f32 = 100.0;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeMap {
    width: u32,
    height: u32,
    bits: Vec<bool>,
}

impl EdgeMap {
    pub fn empty(width: u32, height: u32) -> Self {
        EdgeMap { width, height, bits: vec![false; width as usize * height as usize] }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn get(&self, x: u32, y: u32) -> bool {
        self.bits[self.idx(x, y)]
    }

    pub fn set(&mut self, x: u32, y: u32, v: bool) {
        let i = self.idx(x, y);
        self.bits[i] = v;
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }

    pub fn iter_set(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        let w = self.width;
        self.bits.iter().enumerate().filter(|(_, b)| **b).map(move |(i, _)| (i as u32 % w, i as u32 / w))
    }

    fn idx(&self, x: u32, y: u32) -> usize {
        y as usize * self.width as usize + x as usize
    }

    fn get_or(&self, x: i64, y: i64, outside: bool) -> bool {
        if x < 0 || y < 0 || x >= self.width as i64 || y >= self.height as i64 {
            outside
        } else {
            self.get(x as u32, y as u32)
        }
    }
}

fn sobel_magnitude(raster: &ScreenRaster) -> Vec<f32> {
    let (w, h) = (raster.width() as i64, raster.height() as i64);
    let mut mag = Vec::with_capacity((w * h) as usize);
    for y in 0..h {
        for x in 0..w {
            let p = |dx: i64, dy: i64| raster.get_clamped(x + dx, y + dy) as f32;
            let gx = (p(1, -1) + 2.0 * p(1, 0) + p(1, 1)) - (p(-1, -1) + 2.0 * p(-1, 0) + p(-1, 1));
            let gy = (p(-1, 1) + 2.0 * p(0, 1) + p(1, 1)) - (p(-1, -1) + 2.0 * p(0, -1) + p(1, -1));
            mag.push((gx * gx + gy * gy).sqrt());
        }
    }
    mag
}

/// Sobel gradient magnitude thresholded with hysteresis: strong pixels are
/// kept, weak pixels are kept only when 8-connected to a strong one.
pub fn detect_edges(raster: &ScreenRaster) -> EdgeMap {
    let (w, h) = (raster.width(), raster.height());
    let mag = sobel_magnitude(raster);
    let mut edges = EdgeMap::empty(w, h);
    let mut stack: Vec<(u32, u32)> = Vec::new();
    for (i, m) in mag.iter().enumerate() {
        if *m >= HIGH_THRESHOLD {
            let (x, y) = (i as u32 % w, i as u32 / w);
            edges.set(x, y, true);
            stack.push((x, y));
        }
    }
    while let Some((x, y)) = stack.pop() {
        for (nx, ny) in neighbors8(x, y, w, h) {
            let i = ny as usize * w as usize + nx as usize;
            if !edges.get(nx, ny) && mag[i] >= LOW_THRESHOLD {
                edges.set(nx, ny, true);
                stack.push((nx, ny));
            }
        }
    }
    edges
}

pub(crate) fn neighbors8(x: u32, y: u32, w: u32, h: u32) -> impl Iterator<Item = (u32, u32)> {
    (-1i64..=1)
        .flat_map(|dy| (-1i64..=1).map(move |dx| (dx, dy)))
        .filter(|&(dx, dy)| dx != 0 || dy != 0)
        .map(move |(dx, dy)| (x as i64 + dx, y as i64 + dy))
        .filter(move |&(nx, ny)| nx >= 0 && ny >= 0 && nx < w as i64 && ny < h as i64)
        .map(|(nx, ny)| (nx as u32, ny as u32))
}

fn morph3(map: &EdgeMap, dilate: bool) -> EdgeMap {
    let mut out = EdgeMap::empty(map.width, map.height);
    for y in 0..map.height as i64 {
        for x in 0..map.width as i64 {
            let mut acc = !dilate;
            for dy in -1..=1 {
                for dx in -1..=1 {
                    let v = map.get_or(x + dx, y + dy, !dilate);
                    if dilate {
                        acc |= v;
                    } else {
                        acc &= v;
                    }
                }
            }
            out.set(x as u32, y as u32, acc);
        }
    }
    out
}

/// One pass of dilation followed by erosion with a 3x3 square element.
///
/// Out-of-image pixels count as background for dilation and foreground for
/// erosion, so the closing never shrinks a mask.
pub fn morphological_close(map: &EdgeMap) -> EdgeMap {
    morph3(&morph3(map, true), false)
}
