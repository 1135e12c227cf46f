use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{Ekg, EkgError, Entity, EntityKind, Relationship};

pub const SCHEMA: &str = "scengraph-ekg/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Dot,
    /// Versioned JSON document; re-imports losslessly.
    Json,
}

impl FromStr for ExportFormat {
    type Err = EkgError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "dot" => Ok(ExportFormat::Dot),
            "json" | "structured" => Ok(ExportFormat::Json),
            other => Err(EkgError::Usage(format!("unknown export format {other:?} (expected dot or json)"))),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct Document {
    schema: String,
    scenario_id: String,
    entities: Vec<Entity>,
    relations: Vec<Relationship>,
}

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

fn to_dot(g: &Ekg) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "digraph ekg {{");
    let _ = writeln!(s, "  label=\"{}\";", dot_escape(&g.scenario_id));
    for e in g.entities() {
        let shape = match e.kind {
            EntityKind::Cnt => "box",
            EntityKind::Wid => "hexagon",
            EntityKind::Opt => "diamond",
            EntityKind::Txt => "ellipse",
        };
        let mut tags = String::new();
        for (on, t) in [(e.start_tag, "start"), (e.tail_tag, "tail"), (e.branch_point, "branch")] {
            if on {
                tags.push_str(&format!(" [{t}]"));
            }
        }
        let origin = e.origin.map(|o| format!(" ({o:?})").to_lowercase()).unwrap_or_default();
        let _ =
            writeln!(s, "  {} [shape={shape}, label=\"{}: {}{origin}{tags}\"];", e.id, e.kind, dot_escape(&e.label));
    }
    for r in g.relations() {
        let mut attrs = format!("label=\"{}\"", r.kind);
        if r.kind.is_similar() {
            attrs.push_str(", dir=none, style=dashed");
        }
        if let Some(w) = r.weight {
            attrs.push_str(&format!(", weight_value=\"{w:.4}\""));
        }
        let _ = writeln!(s, "  {} -> {} [{attrs}];", r.src, r.dst);
    }
    s.push_str("}\n");
    s
}

/// Deterministic serialization; entities appear in id order and
/// relationships in insertion order.
pub fn export_graph(g: &Ekg, format: &str) -> Result<String, EkgError> {
    Ok(match format.parse::<ExportFormat>()? {
        ExportFormat::Dot => to_dot(g),
        ExportFormat::Json => {
            let doc = Document {
                schema: SCHEMA.into(),
                scenario_id: g.scenario_id.clone(),
                entities: g.entities().to_vec(),
                relations: g.relations().to_vec(),
            };
            let mut s = serde_json::to_string_pretty(&doc).expect("graph serializes");
            s.push('\n');
            s
        }
    })
}

pub fn import_json(src: &str) -> Result<Ekg, EkgError> {
    let doc: Document = serde_json::from_str(src).map_err(|e| EkgError::Import(e.to_string()))?;
    if doc.schema != SCHEMA {
        return Err(EkgError::Import(format!("unsupported schema {:?}", doc.schema)));
    }
    Ekg::from_parts(doc.scenario_id, doc.entities, doc.relations)
}
