//! Line-oriented text layer: `"<string>" x0 y0 x1 y1`, with `\"` and `\\`
//! escapes inside the quotes. Blank lines are ignored.

use std::fmt::Write as _;

use crate::screen::{BBox, TextItem};

pub fn write_text_layer(items: &[TextItem]) -> String {
    let mut out = String::new();
    for it in items {
        out.push('"');
        for c in it.text.chars() {
            if c == '"' || c == '\\' {
                out.push('\\');
            }
            out.push(c);
        }
        let b = it.bbox;
        let _ = writeln!(out, "\" {} {} {} {}", b.x0, b.y0, b.x1, b.y1);
    }
    out
}

/// Parses a text layer, reporting the 1-based line of the first error.
pub fn parse_text_layer(src: &str) -> Result<Vec<TextItem>, (usize, String)> {
    let mut items = Vec::new();
    for (n, line) in src.lines().enumerate() {
        let lineno = n + 1;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut chars = line.char_indices();
        if chars.next().map(|(_, c)| c) != Some('"') {
            return Err((lineno, "expected opening quote".into()));
        }
        let mut text = String::new();
        let mut rest = None;
        while let Some((i, c)) = chars.next() {
            match c {
                '\\' => match chars.next() {
                    Some((_, e @ ('"' | '\\'))) => text.push(e),
                    _ => return Err((lineno, "bad escape".into())),
                },
                '"' => {
                    rest = Some(&line[i + 1..]);
                    break;
                }
                c => text.push(c),
            }
        }
        let rest = rest.ok_or((lineno, "unterminated string".to_string()))?;
        let nums: Vec<u32> = rest
            .split_whitespace()
            .map(|t| t.parse::<u32>())
            .collect::<Result<_, _>>()
            .map_err(|e| (lineno, format!("bad coordinate: {e}")))?;
        let [x0, y0, x1, y1] = nums[..] else {
            return Err((lineno, format!("expected 4 coordinates, found {}", nums.len())));
        };
        if x0 >= x1 || y0 >= y1 {
            return Err((lineno, format!("degenerate box {x0} {y0} {x1} {y1}")));
        }
        items.push(TextItem { text, bbox: BBox::new(x0, y0, x1, y1) });
    }
    Ok(items)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_escapes() {
        let items = parse_text_layer("\"say \\\"hi\\\" \\\\ ok\" 1 2 30 40\n\n").unwrap();
        assert_eq!(items[0].text, "say \"hi\" \\ ok");
        assert_eq!(items[0].bbox, BBox::new(1, 2, 30, 40));
    }

    #[test]
    fn reports_line_numbers() {
        assert_eq!(parse_text_layer("\"a\" 0 0 1 1\n\"b\" 0 0 1\n").unwrap_err().0, 2);
        assert_eq!(parse_text_layer("b 0 0 1 1").unwrap_err().0, 1);
        assert_eq!(parse_text_layer("\"b 0 0 1 1").unwrap_err().0, 1);
        assert!(parse_text_layer("\"b\" 5 0 5 1").is_err());
    }

    proptest! {
        #[test]
        fn roundtrip(texts in prop::collection::vec("[ -~]{0,12}", 0..6)) {
            let items: Vec<TextItem> = texts
                .iter()
                .enumerate()
                .map(|(i, t)| TextItem { text: t.clone(), bbox: BBox::new(i as u32, 0, i as u32 + 3, 9) })
                .collect();
            prop_assert_eq!(parse_text_layer(&write_text_layer(&items)).unwrap(), items);
        }
    }
}
