//! Ranked widget query against a frozen graph.
//!
//! A widget matches a CNT entity when some widget descriptor (its text, or
//! text plus type) reaches the threshold against some entity descriptor (the
//! label, an attached TXT label, or TXT label plus WID type). Probability is
//! zero unless the matched entity lies one order hop after the context's
//! last entity, with similar edges treated as free hops on both ends. With
//! an empty context only start-tagged entities are reachable.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::screen::{BBox, GuiStructure, GuiWidget, WidgetType};
use crate::text::{Operation, TextAnalyzer, TextProfile};

use super::{Ekg, EntityId, EntityKind, RelationKind};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WidgetCandidate {
    /// Index into the queried structure's widget list.
    pub widget: usize,
    pub bbox: BBox,
    pub text: Option<String>,
    pub widget_type: WidgetType,
    pub operation: Operation,
    pub parameter: Option<String>,
    pub probability: f64,
    pub entity: EntityId,
    pub tail: bool,
    pub branch: bool,
}

/// Operations a widget type accepts, most natural first.
pub fn legal_operations(ty: WidgetType) -> &'static [Operation] {
    use Operation::*;
    match ty {
        WidgetType::Button => &[Click, LongClick],
        WidgetType::TextField => &[Input, Click],
        WidgetType::TextView => &[Click, Choose, LongClick],
        WidgetType::ImageView => &[Click, Slide, LongClick],
        WidgetType::Icon => &[Click, LongClick],
        WidgetType::Checkbox => &[Check, Click],
        WidgetType::Unknown => &[Click],
    }
}

pub fn widget_descriptors(w: &GuiWidget) -> Vec<String> {
    match w.text.as_deref().map(str::trim).filter(|t| !t.is_empty()) {
        None => Vec::new(),
        Some(t) => vec![t.to_string(), format!("{t} {}", w.widget_type.name().to_lowercase())],
    }
}

pub fn entity_descriptors(g: &Ekg, id: EntityId) -> Vec<String> {
    let e = g.entity(id).expect("entity exists");
    let mut out = vec![e.label.clone()];
    let wids: Vec<String> = g
        .neighbors(id, RelationKind::CntWidConcreteWidget)
        .into_iter()
        .map(|w| g.entity(w).unwrap().label.clone())
        .collect();
    for t in g.neighbors(id, RelationKind::CntTxtConcreteText) {
        let tl = &g.entity(t).unwrap().label;
        out.push(tl.clone());
        for w in &wids {
            out.push(format!("{tl} {w}"));
        }
    }
    out.sort();
    out.dedup();
    out
}

/// Query state with per-entity descriptor profiles computed once.
pub struct QueryEngine<'g> {
    graph: &'g Ekg,
    analyzer: &'g TextAnalyzer,
    theta: f64,
    cnts: Vec<(EntityId, Vec<TextProfile>)>,
}

impl<'g> QueryEngine<'g> {
    pub fn new(graph: &'g Ekg, analyzer: &'g TextAnalyzer, theta: f64) -> Self {
        let cnts = graph
            .entities_of(EntityKind::Cnt)
            .map(|e| (e.id, entity_descriptors(graph, e.id).iter().map(|d| analyzer.profile(d)).collect()))
            .collect();
        QueryEngine { graph, analyzer, theta, cnts }
    }

    pub fn graph(&self) -> &'g Ekg {
        self.graph
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Entities that can follow the context's last entity.
    pub fn reachable(&self, last: Option<EntityId>) -> BTreeSet<EntityId> {
        let g = self.graph;
        let seeds: Vec<EntityId> = match last {
            None => g.entities_of(EntityKind::Cnt).filter(|e| e.start_tag).map(|e| e.id).collect(),
            Some(l) => g.similar_class(l).into_iter().flat_map(|m| g.order_successors(m)).collect(),
        };
        seeds.into_iter().flat_map(|s| g.similar_class(s)).collect()
    }

    fn score(&self, widget: &[TextProfile], entity: &[TextProfile]) -> f64 {
        let mut best = 0.0f64;
        for a in widget {
            for b in entity {
                best = best.max(self.analyzer.similarity_profiles(a, b));
            }
        }
        best
    }

    /// Similarity of a widget to one entity; the maximum over descriptor
    /// pairs.
    pub fn similarity(&self, w: &GuiWidget, id: EntityId) -> f64 {
        let wp: Vec<TextProfile> = widget_descriptors(w).iter().map(|d| self.analyzer.profile(d)).collect();
        self.cnts.iter().find(|(e, _)| *e == id).map_or(0.0, |(_, ep)| self.score(&wp, ep))
    }

    fn class_ops(&self, id: EntityId) -> BTreeSet<Operation> {
        let g = self.graph;
        let ops = |e: EntityId| -> Vec<Operation> {
            g.neighbors(e, RelationKind::CntOptOperate)
                .into_iter()
                .filter_map(|o| g.entity(o).and_then(|o| o.label.parse().ok()))
                .collect()
        };
        let own: BTreeSet<Operation> = ops(id).into_iter().collect();
        if !own.is_empty() {
            return own;
        }
        g.similar_class(id).into_iter().flat_map(ops).collect()
    }

    fn literal(&self, id: EntityId, op: Operation) -> Option<String> {
        let key = format!("literal:{}", op.name());
        let g = self.graph;
        std::iter::once(id)
            .chain(g.similar_class(id))
            .find_map(|e| g.entity(e)?.attributes.get(&key)?.iter().next().cloned())
    }

    pub fn query(&self, gui: &GuiStructure, last: Option<EntityId>) -> Vec<WidgetCandidate> {
        let reach = self.reachable(last);
        let mut out = Vec::new();
        for (wi, w) in gui.widgets.iter().enumerate() {
            let wp: Vec<TextProfile> = widget_descriptors(w).iter().map(|d| self.analyzer.profile(d)).collect();
            if wp.is_empty() {
                continue;
            }
            // best reachable match, else best match overall
            let mut best_in: Option<(EntityId, f64)> = None;
            let mut best_any: Option<(EntityId, f64)> = None;
            for (id, ep) in &self.cnts {
                let s = self.score(&wp, ep);
                if s < self.theta {
                    continue;
                }
                if best_any.is_none_or(|(_, b)| s > b) {
                    best_any = Some((*id, s));
                }
                if reach.contains(id) && best_in.is_none_or(|(_, b)| s > b) {
                    best_in = Some((*id, s));
                }
            }
            let (entity, probability) = match (best_in, best_any) {
                (Some(m), _) => m,
                (None, Some((id, _))) => (id, 0.0),
                (None, None) => continue,
            };
            let ops = self.class_ops(entity);
            let legal = legal_operations(w.widget_type);
            let operation = legal.iter().copied().find(|o| ops.contains(o)).unwrap_or(legal[0]);
            let e = self.graph.entity(entity).unwrap();
            out.push(WidgetCandidate {
                widget: wi,
                bbox: w.bbox,
                text: w.text.clone(),
                widget_type: w.widget_type,
                operation,
                parameter: self.literal(entity, operation),
                probability,
                entity,
                tail: e.tail_tag,
                branch: e.branch_point,
            });
        }
        out.sort_by(|a, b| {
            b.probability
                .total_cmp(&a.probability)
                .then((a.bbox.y0, a.bbox.x0).cmp(&(b.bbox.y0, b.bbox.x0)))
                .then(a.entity.cmp(&b.entity))
        });
        out
    }
}

/// One-shot query; build a [`QueryEngine`] to amortize descriptor work.
pub fn query(
    graph: &Ekg,
    analyzer: &TextAnalyzer,
    gui: &GuiStructure,
    last: Option<EntityId>,
    theta: f64,
) -> Vec<WidgetCandidate> {
    QueryEngine::new(graph, analyzer, theta).query(gui, last)
}
