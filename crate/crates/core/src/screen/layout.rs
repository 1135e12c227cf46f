//! Row/column layout tree from widget boxes.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{BBox, WidgetBox, WidgetType};

/// Coordinates closer than this fraction of the screen extent share a band.
pub const DEFAULT_MERGE_THRESHOLD: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayoutLeaf {
    pub bbox: BBox,
    pub widget_type: WidgetType,
    pub text: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnCell {
    pub x0: u32,
    pub x1: u32,
    pub leaves: Vec<LayoutLeaf>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowBand {
    pub y0: u32,
    pub y1: u32,
    pub columns: Vec<ColumnCell>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct LayoutTree {
    pub width: u32,
    pub height: u32,
    pub rows: Vec<RowBand>,
}

impl LayoutTree {
    pub fn leaf_count(&self) -> usize {
        self.rows.iter().flat_map(|r| &r.columns).map(|c| c.leaves.len()).sum()
    }

    pub fn leaves(&self) -> impl Iterator<Item = &LayoutLeaf> {
        self.rows.iter().flat_map(|r| &r.columns).flat_map(|c| &c.leaves)
    }

    /// Index of the row band holding a leaf with this box.
    pub fn row_of(&self, bbox: &BBox) -> Option<usize> {
        self.rows.iter().position(|r| r.columns.iter().any(|c| c.leaves.iter().any(|l| l.bbox == *bbox)))
    }

    /// Indented text rendering, one node per line.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "layout {}x{}", self.width, self.height);
        for row in &self.rows {
            let _ = writeln!(s, "  row y={}..{}", row.y0, row.y1);
            for col in &row.columns {
                let _ = writeln!(s, "    col x={}..{}", col.x0, col.x1);
                for leaf in &col.leaves {
                    let text = leaf.text.as_deref().map(|t| format!(" {t:?}")).unwrap_or_default();
                    let _ = writeln!(s, "      {}{} {}", leaf.widget_type, text, leaf.bbox);
                }
            }
        }
        s
    }
}

/// Single-linkage clustering of sorted keys followed by merging of groups
/// whose extents overlap. Returns groups of indices into `spans`.
fn cluster(spans: &[(u32, u32)], tolerance: f64) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..spans.len()).collect();
    order.sort_by_key(|&i| (spans[i].0, spans[i].1, i));
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut prev: Option<u32> = None;
    for i in order {
        let start = spans[i].0;
        match prev {
            Some(p) if ((start - p) as f64) < tolerance => groups.last_mut().unwrap().push(i),
            _ => groups.push(vec![i]),
        }
        prev = Some(start);
    }
    let extent = |g: &[usize]| {
        let lo = g.iter().map(|&i| spans[i].0).min().unwrap();
        let hi = g.iter().map(|&i| spans[i].1).max().unwrap();
        (lo, hi)
    };
    let mut merged: Vec<Vec<usize>> = Vec::new();
    for g in groups {
        if let Some(last) = merged.last_mut() {
            if extent(last).1 > extent(&g).0 {
                last.extend(g);
                continue;
            }
        }
        merged.push(g);
    }
    merged
}

/// Layout tree: vertical coordinates form row bands, horizontal
/// coordinates form column cells inside each band. Groups are keyed on box
/// top-left corners; bands whose extents overlap are merged.
pub fn characterize_layout(boxes: &[WidgetBox], width: u32, height: u32, threshold: f64) -> LayoutTree {
    let mut sorted: Vec<&WidgetBox> = boxes.iter().collect();
    sorted.sort_by(|a, b| (a.bbox, a.widget_type, &a.text).cmp(&(b.bbox, b.widget_type, &b.text)));
    let vspans: Vec<(u32, u32)> = sorted.iter().map(|b| (b.bbox.y0, b.bbox.y1)).collect();
    let mut rows = Vec::new();
    for band in cluster(&vspans, threshold * height as f64) {
        let members: Vec<&WidgetBox> = band.iter().map(|&i| sorted[i]).collect();
        let hspans: Vec<(u32, u32)> = members.iter().map(|b| (b.bbox.x0, b.bbox.x1)).collect();
        let mut columns = Vec::new();
        for cell in cluster(&hspans, threshold * width as f64) {
            let mut leaves: Vec<LayoutLeaf> = cell
                .iter()
                .map(|&i| LayoutLeaf {
                    bbox: members[i].bbox,
                    widget_type: members[i].widget_type,
                    text: members[i].text.clone(),
                })
                .collect();
            leaves.sort_by_key(|l| (l.bbox.y0, l.bbox.x0, l.bbox));
            columns.push(ColumnCell {
                x0: leaves.iter().map(|l| l.bbox.x0).min().unwrap(),
                x1: leaves.iter().map(|l| l.bbox.x1).max().unwrap(),
                leaves,
            });
        }
        rows.push(RowBand {
            y0: members.iter().map(|b| b.bbox.y0).min().unwrap(),
            y1: members.iter().map(|b| b.bbox.y1).max().unwrap(),
            columns,
        });
    }
    LayoutTree { width, height, rows }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn wb(x0: u32, y0: u32, x1: u32, y1: u32) -> WidgetBox {
        WidgetBox::detected(BBox::new(x0, y0, x1, y1))
    }

    #[test]
    fn singleton() {
        let t = characterize_layout(&[wb(5, 5, 20, 15)], 100, 200, DEFAULT_MERGE_THRESHOLD);
        assert_eq!(t.rows.len(), 1);
        assert_eq!(t.rows[0].columns.len(), 1);
        assert_eq!(t.leaf_count(), 1);
    }

    #[test]
    fn close_tops_share_a_band() {
        // y0 delta of 10 px on a 200 px screen is 0.05 of the height
        let t = characterize_layout(&[wb(5, 20, 30, 28), wb(60, 30, 90, 38)], 100, 200, 0.1);
        assert_eq!(t.rows.len(), 1);
        assert_eq!(t.rows[0].columns.len(), 2);
    }

    #[test]
    fn grid_two_by_two() {
        // deltas of 0.3 of each dimension
        let boxes = [wb(10, 20, 20, 30), wb(40, 20, 50, 30), wb(10, 80, 20, 90), wb(40, 80, 50, 90)];
        let t = characterize_layout(&boxes, 100, 200, 0.1);
        assert_eq!(t.rows.len(), 2);
        assert!(t.rows.iter().all(|r| r.columns.len() == 2 && r.columns.iter().all(|c| c.leaves.len() == 1)));
    }

    #[test]
    fn overlapping_bands_merge() {
        let t = characterize_layout(&[wb(0, 0, 10, 100), wb(20, 50, 30, 60)], 100, 200, 0.1);
        assert_eq!(t.rows.len(), 1);
    }

    #[test]
    fn text_export_lists_every_leaf() {
        let mut b = wb(5, 5, 20, 15);
        b.text = Some("ok".into());
        let s = characterize_layout(&[b], 100, 200, 0.1).to_text();
        assert!(s.starts_with("layout 100x200\n"));
        assert!(s.contains("\"ok\""));
    }

    fn arb_boxes() -> impl Strategy<Value = Vec<WidgetBox>> {
        prop::collection::vec((0u32..180, 0u32..380, 1u32..20, 1u32..20), 0..12)
            .prop_map(|v| v.into_iter().map(|(x, y, w, h)| wb(x, y, x + w, y + h)).collect())
    }

    proptest! {
        #[test]
        fn invariant_under_permutation(boxes in arb_boxes(), seed in any::<u64>()) {
            let mut shuffled = boxes.clone();
            let n = shuffled.len();
            for i in (1..n).rev() {
                let j = (seed.wrapping_mul(i as u64 + 7) % (i as u64 + 1)) as usize;
                shuffled.swap(i, j);
            }
            prop_assert_eq!(
                characterize_layout(&boxes, 200, 400, 0.1),
                characterize_layout(&shuffled, 200, 400, 0.1)
            );
        }

        #[test]
        fn bands_disjoint_and_cover_all(boxes in arb_boxes(), t in 0.0f64..0.5) {
            let tree = characterize_layout(&boxes, 200, 400, t);
            prop_assert_eq!(tree.leaf_count(), boxes.len());
            for w in tree.rows.windows(2) {
                prop_assert!(w[0].y1 <= w[1].y0);
            }
        }

        #[test]
        fn raising_threshold_never_adds_bands(boxes in arb_boxes(), a in 0.0f64..0.5, b in 0.0f64..0.5) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let n_lo = characterize_layout(&boxes, 200, 400, lo).rows.len();
            let n_hi = characterize_layout(&boxes, 200, 400, hi).rows.len();
            prop_assert!(n_hi <= n_lo);
        }
    }
}
