//! Widget extraction, attribute attachment and layout characterization
//! over synthetic screenshots.

mod edges;
mod layout;
mod raster;
mod widgets;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use edges::{detect_edges, morphological_close, EdgeMap, HIGH_THRESHOLD, LOW_THRESHOLD};
pub use layout::{characterize_layout, ColumnCell, LayoutLeaf, LayoutTree, RowBand, DEFAULT_MERGE_THRESHOLD};
pub use raster::{read_pgm, write_pgm};
pub use widgets::{
    attach_text, classify_widget, extract_widgets, has_border, AttachedText, BoxSource, WidgetBox, BORDER_CONTRAST,
    MIN_WIDGET_AREA, SMALL_SQUARE_FRACTION,
};

use crate::corpus::ScreenBundle;

#[derive(Debug, Error)]
pub enum ScreenError {
    #[error("raster dimensions must be at least 1x1, got {width}x{height}")]
    EmptyRaster { width: u32, height: u32 },
    #[error("pixel buffer holds {actual} values, expected {expected}")]
    BufferSize { expected: usize, actual: usize },
    #[error("malformed graymap: {0}")]
    Pgm(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Axis-aligned pixel box, inclusive of `(x0, y0)` and exclusive of `(x1, y1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "[u32; 4]", into = "[u32; 4]")]
pub struct BBox {
    pub x0: u32,
    pub y0: u32,
    pub x1: u32,
    pub y1: u32,
}

impl From<[u32; 4]> for BBox {
    fn from(v: [u32; 4]) -> Self {
        BBox::new(v[0], v[1], v[2], v[3])
    }
}

impl From<BBox> for [u32; 4] {
    fn from(b: BBox) -> Self {
        [b.x0, b.y0, b.x1, b.y1]
    }
}

impl BBox {
    pub const fn new(x0: u32, y0: u32, x1: u32, y1: u32) -> Self {
        BBox { x0, y0, x1, y1 }
    }

    pub fn width(&self) -> u32 {
        self.x1.saturating_sub(self.x0)
    }

    pub fn height(&self) -> u32 {
        self.y1.saturating_sub(self.y0)
    }

    pub fn area(&self) -> u64 {
        self.width() as u64 * self.height() as u64
    }

    pub fn is_empty(&self) -> bool {
        self.x0 >= self.x1 || self.y0 >= self.y1
    }

    pub fn intersection(&self, other: &BBox) -> Option<BBox> {
        let b = BBox::new(self.x0.max(other.x0), self.y0.max(other.y0), self.x1.min(other.x1), self.y1.min(other.y1));
        (!b.is_empty()).then_some(b)
    }

    pub fn fits_within(&self, width: u32, height: u32) -> bool {
        !self.is_empty() && self.x1 <= width && self.y1 <= height
    }

    pub fn center(&self) -> (u32, u32) {
        ((self.x0 + self.x1) / 2, (self.y0 + self.y1) / 2)
    }

    pub fn contains_point(&self, x: u32, y: u32) -> bool {
        x >= self.x0 && x < self.x1 && y >= self.y0 && y < self.y1
    }

    /// Largest per-edge distance between two boxes.
    pub fn max_edge_delta(&self, other: &BBox) -> u32 {
        [self.x0.abs_diff(other.x0), self.y0.abs_diff(other.y0), self.x1.abs_diff(other.x1), self.y1.abs_diff(other.y1)]
            .into_iter()
            .max()
            .unwrap_or(0)
    }

    /// Background pixels separating two boxes along the wider axis gap.
    pub fn gap(&self, other: &BBox) -> u32 {
        let gx = other.x0.saturating_sub(self.x1).max(self.x0.saturating_sub(other.x1));
        let gy = other.y0.saturating_sub(self.y1).max(self.y0.saturating_sub(other.y1));
        gx.max(gy)
    }
}

impl fmt::Display for BBox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{},{},{})", self.x0, self.y0, self.x1, self.y1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum WidgetType {
    Button,
    TextField,
    TextView,
    ImageView,
    Checkbox,
    Icon,
    Unknown,
}

impl WidgetType {
    pub const ALL: [WidgetType; 7] = [
        WidgetType::Button,
        WidgetType::TextField,
        WidgetType::TextView,
        WidgetType::ImageView,
        WidgetType::Checkbox,
        WidgetType::Icon,
        WidgetType::Unknown,
    ];

    pub fn name(self) -> &'static str {
        match self {
            WidgetType::Button => "Button",
            WidgetType::TextField => "TextField",
            WidgetType::TextView => "TextView",
            WidgetType::ImageView => "ImageView",
            WidgetType::Checkbox => "Checkbox",
            WidgetType::Icon => "Icon",
            WidgetType::Unknown => "Unknown",
        }
    }
}

impl fmt::Display for WidgetType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for WidgetType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        WidgetType::ALL
            .into_iter()
            .find(|t| t.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown widget type {s:?}"))
    }
}

/// One string of the sidecar text layer with its pixel box.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TextItem {
    pub text: String,
    pub bbox: BBox,
}

/// Row-major 8-bit grayscale image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScreenRaster {
    width: u32,
    height: u32,
    pixels: Vec<u8>,
}

impl ScreenRaster {
    pub fn new(width: u32, height: u32, pixels: Vec<u8>) -> Result<Self, ScreenError> {
        if width == 0 || height == 0 {
            return Err(ScreenError::EmptyRaster { width, height });
        }
        let expected = width as usize * height as usize;
        if pixels.len() != expected {
            return Err(ScreenError::BufferSize { expected, actual: pixels.len() });
        }
        Ok(ScreenRaster { width, height, pixels })
    }

    pub fn filled(width: u32, height: u32, value: u8) -> Result<Self, ScreenError> {
        Self::new(width, height, vec![value; width as usize * height as usize])
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn get(&self, x: u32, y: u32) -> u8 {
        self.pixels[y as usize * self.width as usize + x as usize]
    }

    pub fn set(&mut self, x: u32, y: u32, value: u8) {
        let w = self.width as usize;
        self.pixels[y as usize * w + x as usize] = value;
    }

    /// Pixel at `(x, y)` with coordinates clamped to the image.
    pub(crate) fn get_clamped(&self, x: i64, y: i64) -> u8 {
        let x = x.clamp(0, self.width as i64 - 1) as u32;
        let y = y.clamp(0, self.height as i64 - 1) as u32;
        self.get(x, y)
    }

    pub fn fill_rect(&mut self, b: &BBox, value: u8) {
        for y in b.y0..b.y1.min(self.height) {
            for x in b.x0..b.x1.min(self.width) {
                self.set(x, y, value);
            }
        }
    }

    /// One-pixel outline along the inside of `b`.
    pub fn stroke_rect(&mut self, b: &BBox, value: u8) {
        if b.is_empty() {
            return;
        }
        for x in b.x0..b.x1 {
            self.set(x, b.y0, value);
            self.set(x, b.y1 - 1, value);
        }
        for y in b.y0..b.y1 {
            self.set(b.x0, y, value);
            self.set(b.x1 - 1, y, value);
        }
    }
}

/// One analyzed widget of a [`GuiStructure`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GuiWidget {
    pub bbox: BBox,
    pub widget_type: WidgetType,
    pub text: Option<String>,
}

/// Nested GUI structure of one screen, as consumed by graph queries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GuiStructure {
    pub width: u32,
    pub height: u32,
    /// Widgets in screen order `(y0, x0)`.
    pub widgets: Vec<GuiWidget>,
    pub standalone_texts: Vec<TextItem>,
    pub layout: LayoutTree,
}

impl GuiStructure {
    pub fn is_empty(&self) -> bool {
        self.widgets.is_empty()
    }
}

/// Runs extraction, classification, text attachment and layout
/// characterization over one screenshot bundle.
pub fn analyze_bundle(bundle: &ScreenBundle, merge_threshold: f64) -> GuiStructure {
    let raster = &bundle.raster;
    let mut boxes = extract_widgets(raster);
    for b in boxes.iter_mut() {
        b.widget_type = classify_widget(raster, b, &bundle.text_layer);
    }
    let attached = attach_text(&boxes, &bundle.text_layer);
    let boxes = attached.boxes;
    let layout = characterize_layout(&boxes, raster.width(), raster.height(), merge_threshold);
    let widgets =
        boxes.into_iter().map(|b| GuiWidget { bbox: b.bbox, widget_type: b.widget_type, text: b.text }).collect();
    GuiStructure {
        width: raster.width(),
        height: raster.height(),
        widgets,
        standalone_texts: attached.standalone,
        layout,
    }
}
