use serde::{Deserialize, Serialize};

use super::edges::{detect_edges, morphological_close, neighbors8};
use super::{BBox, ScreenRaster, TextItem, WidgetType};

/// Boxes smaller than this many pixels are treated as noise.
pub const MIN_WIDGET_AREA: u64 = 16;
/// Icons and checkboxes are squares no wider than this fraction of the
/// shorter screen side.
pub const SMALL_SQUARE_FRACTION: f64 = 0.05;
/// Mean intensity difference between a box outline and its interior that
/// counts as a drawn border.
pub const BORDER_CONTRAST: f64 = 40.0;
/// Minimum fraction of a text box that must fall inside a widget to attach.
const ATTACH_FRACTION: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoxSource {
    Detected,
    Declared,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WidgetBox {
    pub bbox: BBox,
    pub widget_type: WidgetType,
    pub text: Option<String>,
    pub source: BoxSource,
}

impl WidgetBox {
    pub fn detected(bbox: BBox) -> Self {
        WidgetBox { bbox, widget_type: WidgetType::Unknown, text: None, source: BoxSource::Detected }
    }
}

/// Closed-contour boxes of a screenshot, sorted by `(y0, x0)`.
///
/// Edges are closed with one 3x3 dilation/erosion pass and grouped into
/// 8-connected components. Sobel support reaches one pixel beyond a drawn
/// boundary on each side, so every component box is shrunk by one pixel per
/// edge before the area floor is applied.
pub fn extract_widgets(raster: &ScreenRaster) -> Vec<WidgetBox> {
    let closed = morphological_close(&detect_edges(raster));
    let (w, h) = (closed.width(), closed.height());
    let mut seen = vec![false; w as usize * h as usize];
    let mut out = Vec::new();
    for (sx, sy) in closed.iter_set() {
        let si = sy as usize * w as usize + sx as usize;
        if seen[si] {
            continue;
        }
        seen[si] = true;
        let mut bb = BBox::new(sx, sy, sx + 1, sy + 1);
        let mut stack = vec![(sx, sy)];
        while let Some((x, y)) = stack.pop() {
            bb.x0 = bb.x0.min(x);
            bb.y0 = bb.y0.min(y);
            bb.x1 = bb.x1.max(x + 1);
            bb.y1 = bb.y1.max(y + 1);
            for (nx, ny) in neighbors8(x, y, w, h) {
                let ni = ny as usize * w as usize + nx as usize;
                if !seen[ni] && closed.get(nx, ny) {
                    seen[ni] = true;
                    stack.push((nx, ny));
                }
            }
        }
        let shrunk = BBox::new(
            (bb.x0 + 1).min(bb.x1),
            (bb.y0 + 1).min(bb.y1),
            bb.x1.saturating_sub(1).max(bb.x0),
            bb.y1.saturating_sub(1).max(bb.y0),
        );
        if !shrunk.is_empty() && shrunk.area() >= MIN_WIDGET_AREA {
            out.push(WidgetBox::detected(shrunk));
        }
    }
    out.sort_by_key(|b| (b.bbox.y0, b.bbox.x0, b.bbox.y1, b.bbox.x1));
    out
}

/// Whether the one-pixel outline of `b` contrasts with its interior.
pub fn has_border(raster: &ScreenRaster, b: &BBox) -> bool {
    if b.width() < 3 || b.height() < 3 {
        return false;
    }
    let (mut ring_sum, mut ring_n, mut in_sum, mut in_n) = (0u64, 0u64, 0u64, 0u64);
    for y in b.y0..b.y1 {
        for x in b.x0..b.x1 {
            let v = raster.get(x, y) as u64;
            if x == b.x0 || x == b.x1 - 1 || y == b.y0 || y == b.y1 - 1 {
                ring_sum += v;
                ring_n += 1;
            } else {
                in_sum += v;
                in_n += 1;
            }
        }
    }
    let ring = ring_sum as f64 / ring_n as f64;
    let interior = in_sum as f64 / in_n as f64;
    (ring - interior).abs() > BORDER_CONTRAST
}

fn overlap_fraction(text: &BBox, widget: &BBox) -> f64 {
    let area = text.area();
    if area == 0 {
        return 0.0;
    }
    text.intersection(widget).map_or(0.0, |i| i.area() as f64 / area as f64)
}

/// Heuristic widget typing.
///
/// Small squares are typed first (bordered = Checkbox, solid = Icon) because
/// icons carry their label in the text layer. Then text-bearing boxes are
/// split by border and aspect ratio, and remaining boxes are ImageViews.
pub fn classify_widget(raster: &ScreenRaster, b: &WidgetBox, text_layer: &[TextItem]) -> WidgetType {
    let bb = &b.bbox;
    if bb.width() < 3 || bb.height() < 3 {
        return WidgetType::Unknown;
    }
    let border = has_border(raster, bb);
    let side_cap = SMALL_SQUARE_FRACTION * raster.width().min(raster.height()) as f64;
    let square = bb.width().abs_diff(bb.height()) <= 1;
    if square && bb.width().max(bb.height()) as f64 <= side_cap {
        return if border { WidgetType::Checkbox } else { WidgetType::Icon };
    }
    let has_text = b.text.is_some() || text_layer.iter().any(|t| overlap_fraction(&t.bbox, bb) > ATTACH_FRACTION);
    let aspect = bb.width() as f64 / bb.height() as f64;
    match (has_text, border) {
        (true, true) if aspect > 3.0 => WidgetType::TextField,
        (true, true) => WidgetType::Button,
        (true, false) => WidgetType::TextView,
        (false, _) => WidgetType::ImageView,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttachedText {
    pub boxes: Vec<WidgetBox>,
    /// Text items that fell inside no widget.
    pub standalone: Vec<TextItem>,
}

/// Attaches each text item to the box holding the largest share of it,
/// provided that share exceeds one half. Ties go to the smaller box.
/// Several texts on one box are joined with a space in layer order.
pub fn attach_text(boxes: &[WidgetBox], text_layer: &[TextItem]) -> AttachedText {
    let mut out: Vec<WidgetBox> = boxes.to_vec();
    let mut standalone = Vec::new();
    for item in text_layer {
        let best = boxes
            .iter()
            .enumerate()
            .map(|(i, b)| (i, overlap_fraction(&item.bbox, &b.bbox), b.bbox.area()))
            .filter(|(_, f, _)| *f > ATTACH_FRACTION)
            .max_by(|a, b| a.1.total_cmp(&b.1).then(b.2.cmp(&a.2)).then(b.0.cmp(&a.0)));
        match best {
            Some((i, _, _)) => {
                let slot = &mut out[i].text;
                *slot = Some(match slot.take() {
                    Some(prev) => format!("{prev} {}", item.text),
                    None => item.text.clone(),
                });
            }
            None => standalone.push(item.clone()),
        }
    }
    AttachedText { boxes: out, standalone }
}
