//! Drawing rules, paired with the classifier cascade:
//!
//! | type      | outline | interior | text layer            |
//! |-----------|---------|----------|-----------------------|
//! | Button    | 255     | 110      | label, inset 2px      |
//! | TextField | 255     | 40       | label, inset 2px      |
//! | TextView  | 170     | 170      | label, inset 2px      |
//! | ImageView | 90      | 90       | none                  |
//! | Icon      | 220     | 220      | label over the square |
//! | Checkbox  | 255     | 0        | label over the square |
//!
//! The background is 0. Static texts go to the text layer only.

use crate::corpus::ScreenBundle;
use crate::screen::{BBox, ScreenRaster, TextItem, WidgetType, SMALL_SQUARE_FRACTION};

use super::Screen;

/// Minimum background gap between sibling widgets, so their edge
/// responses never merge under closing.
pub const MIN_WIDGET_GAP: u32 = 6;
/// Minimum distance from a widget to the screen border.
pub const SCREEN_MARGIN: u32 = 2;

const BACKGROUND: u8 = 0;

pub(crate) fn small_square_cap(width: u32, height: u32) -> f64 {
    SMALL_SQUARE_FRACTION * width.min(height) as f64
}

fn inset(b: &BBox) -> BBox {
    if b.width() > 6 && b.height() > 6 {
        BBox::new(b.x0 + 2, b.y0 + 2, b.x1 - 2, b.y1 - 2)
    } else {
        *b
    }
}

/// Deterministic screenshot bundle of one screen.
pub fn render(screen: &Screen, width: u32, height: u32) -> ScreenBundle {
    let mut raster = ScreenRaster::filled(width, height, BACKGROUND).expect("validated dimensions");
    let mut text_layer = Vec::new();
    for w in &screen.widgets {
        let b = &w.bbox;
        let (outline, interior) = match w.widget_type {
            WidgetType::Button => (255, 110),
            WidgetType::TextField => (255, 40),
            WidgetType::TextView => (170, 170),
            WidgetType::ImageView => (90, 90),
            WidgetType::Icon => (220, 220),
            WidgetType::Checkbox => (255, BACKGROUND),
            WidgetType::Unknown => (255, 255),
        };
        raster.fill_rect(b, interior);
        raster.stroke_rect(b, outline);
        if w.widget_type != WidgetType::ImageView && !w.label.is_empty() {
            text_layer.push(TextItem { text: w.label.clone(), bbox: inset(b) });
        }
    }
    for t in &screen.texts {
        text_layer.push(TextItem { text: t.text.clone(), bbox: t.bbox });
    }
    ScreenBundle { raster, text_layer }
}
