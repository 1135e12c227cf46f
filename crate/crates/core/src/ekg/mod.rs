//! Event knowledge graph: typed entities, validated relationships, scenario
//! tags, construction from reports, and the context-aware widget query.

mod build;
mod export;
mod query;

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::screen::WidgetType;
use crate::text::Operation;

pub use build::{construct_from_reports, construct_with_log, BuildLog, BuildOptions};
pub use export::{export_graph, import_json, ExportFormat, SCHEMA};
pub use query::{legal_operations, query, QueryEngine, WidgetCandidate};

#[derive(Debug, Error, PartialEq)]
pub enum EkgError {
    #[error("entity kind error: {0}")]
    EntityKind(String),
    #[error("relation kind error: {kind} cannot join {src} and {dst}")]
    RelationKind { kind: RelationKind, src: EntityKind, dst: EntityKind },
    #[error("unknown entity {0}")]
    UnknownEntity(EntityId),
    #[error("usage: {0}")]
    Usage(String),
    #[error("graph import: {0}")]
    Import(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EntityId(pub u32);

impl EntityId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for EntityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EntityKind {
    #[serde(rename = "CNT")]
    Cnt,
    #[serde(rename = "WID")]
    Wid,
    #[serde(rename = "OPT")]
    Opt,
    #[serde(rename = "TXT")]
    Txt,
}

impl EntityKind {
    pub const ALL: [EntityKind; 4] = [EntityKind::Cnt, EntityKind::Wid, EntityKind::Opt, EntityKind::Txt];

    pub fn name(self) -> &'static str {
        match self {
            EntityKind::Cnt => "CNT",
            EntityKind::Wid => "WID",
            EntityKind::Opt => "OPT",
            EntityKind::Txt => "TXT",
        }
    }
}

impl fmt::Display for EntityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RelationKind {
    #[serde(rename = "TXT_TXT_similar")]
    TxtTxtSimilar,
    #[serde(rename = "CNT_OPT_operate")]
    CntOptOperate,
    #[serde(rename = "CNT_TXT_concrete_text")]
    CntTxtConcreteText,
    #[serde(rename = "CNT_WID_concrete_widget")]
    CntWidConcreteWidget,
    #[serde(rename = "CNT_CNT_similar")]
    CntCntSimilar,
    #[serde(rename = "CNT_CNT_order")]
    CntCntOrder,
}

impl RelationKind {
    pub const ALL: [RelationKind; 6] = [
        RelationKind::TxtTxtSimilar,
        RelationKind::CntOptOperate,
        RelationKind::CntTxtConcreteText,
        RelationKind::CntWidConcreteWidget,
        RelationKind::CntCntSimilar,
        RelationKind::CntCntOrder,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RelationKind::TxtTxtSimilar => "TXT_TXT_similar",
            RelationKind::CntOptOperate => "CNT_OPT_operate",
            RelationKind::CntTxtConcreteText => "CNT_TXT_concrete_text",
            RelationKind::CntWidConcreteWidget => "CNT_WID_concrete_widget",
            RelationKind::CntCntSimilar => "CNT_CNT_similar",
            RelationKind::CntCntOrder => "CNT_CNT_order",
        }
    }

    /// Endpoint kinds as stored: the CNT side first for mixed kinds.
    pub fn endpoints(self) -> (EntityKind, EntityKind) {
        use EntityKind::*;
        match self {
            RelationKind::TxtTxtSimilar => (Txt, Txt),
            RelationKind::CntOptOperate => (Cnt, Opt),
            RelationKind::CntTxtConcreteText => (Cnt, Txt),
            RelationKind::CntWidConcreteWidget => (Cnt, Wid),
            RelationKind::CntCntSimilar | RelationKind::CntCntOrder => (Cnt, Cnt),
        }
    }

    pub fn is_similar(self) -> bool {
        matches!(self, RelationKind::TxtTxtSimilar | RelationKind::CntCntSimilar)
    }
}

impl fmt::Display for RelationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Where a text or entity observation came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    Text,
    Screen,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Provenance {
    pub report_id: String,
    pub step: u32,
    pub origin: Origin,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Entity {
    pub id: EntityId,
    pub kind: EntityKind,
    pub label: String,
    /// Part of the merge key for TXT entities, so a sentence mention and a
    /// screenshot text with the same wording stay distinct.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub origin: Option<Origin>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub attributes: BTreeMap<String, BTreeSet<String>>,
    #[serde(default)]
    pub start_tag: bool,
    #[serde(default)]
    pub tail_tag: bool,
    #[serde(default)]
    pub branch_point: bool,
    #[serde(default)]
    pub provenance: BTreeSet<Provenance>,
}

/// Entity as offered to [`Ekg::append_entity`].
#[derive(Debug, Clone, Default)]
pub struct NewEntity {
    pub kind: Option<EntityKind>,
    pub label: String,
    pub origin: Option<Origin>,
    pub attributes: BTreeMap<String, BTreeSet<String>>,
    pub start_tag: bool,
    pub tail_tag: bool,
    pub provenance: Option<Provenance>,
}

impl NewEntity {
    pub fn new(kind: EntityKind, label: &str) -> Self {
        NewEntity { kind: Some(kind), label: label.to_string(), ..Default::default() }
    }

    pub fn origin(mut self, o: Origin) -> Self {
        self.origin = Some(o);
        self
    }

    pub fn provenance(mut self, report_id: &str, step: u32, origin: Origin) -> Self {
        self.provenance = Some(Provenance { report_id: report_id.to_string(), step, origin });
        self
    }

    pub fn attribute(mut self, key: &str, value: &str) -> Self {
        self.attributes.entry(key.to_string()).or_default().insert(value.to_string());
        self
    }

    pub fn start(mut self) -> Self {
        self.start_tag = true;
        self
    }

    pub fn tail(mut self) -> Self {
        self.tail_tag = true;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Relationship {
    pub src: EntityId,
    pub dst: EntityId,
    pub kind: RelationKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RelationOutcome {
    Stored,
    AlreadyPresent,
    /// A similar edge that would close a loop (or a self-loop).
    LoopAvoided,
    /// An order edge that would close a directed cycle.
    CycleAvoided,
}

/// Whitespace-collapsed lowercase form used as entity label.
pub fn canonical_label(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase()
}

type Key = (EntityKind, String, Option<Origin>);

#[derive(Debug, Clone, Default)]
pub struct Ekg {
    pub scenario_id: String,
    entities: Vec<Entity>,
    relations: Vec<Relationship>,
    by_key: HashMap<Key, EntityId>,
    edge_set: HashSet<(EntityId, EntityId, RelationKind)>,
    adjacency: Vec<Vec<usize>>,
    similar_root: Vec<u32>,
}

impl PartialEq for Ekg {
    fn eq(&self, other: &Self) -> bool {
        self.scenario_id == other.scenario_id && self.entities == other.entities && self.relations == other.relations
    }
}

impl Ekg {
    pub fn new(scenario_id: &str) -> Self {
        Ekg { scenario_id: scenario_id.to_string(), ..Default::default() }
    }

    pub fn entities(&self) -> &[Entity] {
        &self.entities
    }

    pub fn relations(&self) -> &[Relationship] {
        &self.relations
    }

    pub fn entity(&self, id: EntityId) -> Option<&Entity> {
        self.entities.get(id.index())
    }

    pub fn is_empty(&self) -> bool {
        self.entities.is_empty()
    }

    pub fn find(&self, kind: EntityKind, label: &str, origin: Option<Origin>) -> Option<EntityId> {
        let origin = if kind == EntityKind::Txt { origin } else { None };
        self.by_key.get(&(kind, canonical_label(label), origin)).copied()
    }

    pub fn entities_of(&self, kind: EntityKind) -> impl Iterator<Item = &Entity> {
        self.entities.iter().filter(move |e| e.kind == kind)
    }

    /// Validates and inserts an entity, or merges it into the existing
    /// entity with the same key. Tags are OR-ed, attributes and provenance
    /// unioned.
    pub fn append_entity(&mut self, new: NewEntity) -> Result<EntityId, EkgError> {
        let kind = new.kind.ok_or_else(|| EkgError::EntityKind("entity kind missing".into()))?;
        let label = canonical_label(&new.label);
        if label.is_empty() {
            return Err(EkgError::EntityKind(format!("empty {kind} label")));
        }
        if kind != EntityKind::Cnt && (new.start_tag || new.tail_tag) {
            return Err(EkgError::EntityKind(format!("{kind} {label:?} cannot carry a start or tail tag")));
        }
        match kind {
            EntityKind::Opt if !Operation::ALL.iter().any(|op| op.name() == label) => {
                return Err(EkgError::EntityKind(format!("{label:?} is not an operation")));
            }
            EntityKind::Wid if !WidgetType::ALL.iter().any(|t| t.name().to_lowercase() == label) => {
                return Err(EkgError::EntityKind(format!("{label:?} is not a widget type")));
            }
            _ => {}
        }
        if kind != EntityKind::Txt && new.origin.is_some() {
            return Err(EkgError::EntityKind(format!("origin is only recorded on TXT entities, not {kind}")));
        }
        let key = (kind, label.clone(), new.origin);
        let id = match self.by_key.get(&key) {
            Some(id) => *id,
            None => {
                let id = EntityId(self.entities.len() as u32);
                self.entities.push(Entity {
                    id,
                    kind,
                    label,
                    origin: new.origin,
                    attributes: BTreeMap::new(),
                    start_tag: false,
                    tail_tag: false,
                    branch_point: false,
                    provenance: BTreeSet::new(),
                });
                self.adjacency.push(Vec::new());
                self.similar_root.push(id.0);
                self.by_key.insert(key, id);
                id
            }
        };
        let e = &mut self.entities[id.index()];
        e.start_tag |= new.start_tag;
        e.tail_tag |= new.tail_tag;
        for (k, vs) in new.attributes {
            e.attributes.entry(k).or_default().extend(vs);
        }
        if let Some(p) = new.provenance {
            e.provenance.insert(p);
        }
        Ok(id)
    }

    pub(crate) fn set_tags(&mut self, id: EntityId, start: bool, tail: bool) {
        let e = &mut self.entities[id.index()];
        e.start_tag |= start;
        e.tail_tag |= tail;
    }

    fn root(&self, mut i: u32) -> u32 {
        while self.similar_root[i as usize] != i {
            i = self.similar_root[i as usize];
        }
        i
    }

    fn union(&mut self, a: EntityId, b: EntityId) {
        let (ra, rb) = (self.root(a.0), self.root(b.0));
        let (lo, hi) = (ra.min(rb), ra.max(rb));
        self.similar_root[hi as usize] = lo;
    }

    /// Whether two entities are joined by a path of similar edges.
    pub fn similar_connected(&self, a: EntityId, b: EntityId) -> bool {
        self.root(a.0) == self.root(b.0)
    }

    /// Relationship indices touching an entity.
    fn incident(&self, id: EntityId) -> impl Iterator<Item = &Relationship> {
        self.adjacency[id.index()].iter().map(move |&i| &self.relations[i])
    }

    /// Entities joined to `id` by an edge of `kind`, either direction,
    /// ascending by id.
    pub fn neighbors(&self, id: EntityId, kind: RelationKind) -> Vec<EntityId> {
        let mut out: Vec<EntityId> =
            self.incident(id).filter(|r| r.kind == kind).map(|r| if r.src == id { r.dst } else { r.src }).collect();
        out.sort();
        out.dedup();
        out
    }

    pub fn order_successors(&self, id: EntityId) -> Vec<EntityId> {
        let mut out: Vec<EntityId> =
            self.incident(id).filter(|r| r.kind == RelationKind::CntCntOrder && r.src == id).map(|r| r.dst).collect();
        out.sort();
        out
    }

    /// The entity together with everything reachable over similar edges,
    /// ascending by id.
    pub fn similar_class(&self, id: EntityId) -> Vec<EntityId> {
        let root = self.root(id.0);
        (0..self.entities.len() as u32).filter(|&i| self.root(i) == root).map(EntityId).collect()
    }

    fn order_reaches(&self, from: EntityId, to: EntityId) -> bool {
        let mut seen = HashSet::from([from]);
        let mut queue = VecDeque::from([from]);
        while let Some(n) = queue.pop_front() {
            if n == to {
                return true;
            }
            for s in self.order_successors(n) {
                if seen.insert(s) {
                    queue.push_back(s);
                }
            }
        }
        false
    }

    /// Validates and stores a relationship. Mixed-kind edges are stored
    /// with the CNT endpoint as `src`; similar edges with the smaller id as
    /// `src`.
    pub fn append_relation(
        &mut self,
        src: EntityId,
        dst: EntityId,
        kind: RelationKind,
        weight: Option<f64>,
    ) -> Result<RelationOutcome, EkgError> {
        let sk = self.entity(src).ok_or(EkgError::UnknownEntity(src))?.kind;
        let dk = self.entity(dst).ok_or(EkgError::UnknownEntity(dst))?.kind;
        let (want_a, want_b) = kind.endpoints();
        let (src, dst) = if (sk, dk) == (want_a, want_b) {
            (src, dst)
        } else if (dk, sk) == (want_a, want_b) && kind != RelationKind::CntCntOrder {
            (dst, src)
        } else {
            return Err(EkgError::RelationKind { kind, src: sk, dst: dk });
        };
        let (src, dst) = if kind.is_similar() { (src.min(dst), src.max(dst)) } else { (src, dst) };
        if src == dst {
            return Ok(match kind {
                RelationKind::CntCntOrder => RelationOutcome::CycleAvoided,
                _ if kind.is_similar() => RelationOutcome::LoopAvoided,
                _ => unreachable!("mixed-kind edge with one endpoint"),
            });
        }
        if self.edge_set.contains(&(src, dst, kind)) {
            return Ok(RelationOutcome::AlreadyPresent);
        }
        if kind.is_similar() {
            if self.similar_connected(src, dst) {
                return Ok(RelationOutcome::LoopAvoided);
            }
            if kind == RelationKind::TxtTxtSimilar {
                let a = self.neighbors(src, RelationKind::CntTxtConcreteText);
                let b = self.neighbors(dst, RelationKind::CntTxtConcreteText);
                if a.iter().any(|c| b.contains(c)) {
                    return Ok(RelationOutcome::LoopAvoided);
                }
            }
        }
        if kind == RelationKind::CntCntOrder && self.order_reaches(dst, src) {
            return Ok(RelationOutcome::CycleAvoided);
        }
        self.push_relation(Relationship { src, dst, kind, weight });
        Ok(RelationOutcome::Stored)
    }

    fn push_relation(&mut self, r: Relationship) {
        let i = self.relations.len();
        self.edge_set.insert((r.src, r.dst, r.kind));
        self.adjacency[r.src.index()].push(i);
        self.adjacency[r.dst.index()].push(i);
        if r.kind.is_similar() {
            self.union(r.src, r.dst);
        }
        self.relations.push(r);
    }

    /// Marks every CNT whose order successors fall into two or more distinct
    /// similar classes.
    pub fn recompute_branch_points(&mut self) {
        for i in 0..self.entities.len() {
            let id = EntityId(i as u32);
            let branch = self.entities[i].kind == EntityKind::Cnt && {
                let classes: BTreeSet<u32> = self.order_successors(id).iter().map(|s| self.root(s.0)).collect();
                classes.len() >= 2
            };
            self.entities[i].branch_point = branch;
        }
    }

    /// Rebuilds the lookup indexes from raw entity and relation lists.
    pub(crate) fn from_parts(
        scenario_id: String,
        entities: Vec<Entity>,
        relations: Vec<Relationship>,
    ) -> Result<Self, EkgError> {
        let mut g = Ekg::new(&scenario_id);
        for (i, e) in entities.iter().enumerate() {
            if e.id.index() != i {
                return Err(EkgError::Import(format!("entity {} out of sequence at position {i}", e.id)));
            }
            let key = (e.kind, e.label.clone(), e.origin);
            if g.by_key.insert(key, e.id).is_some() {
                return Err(EkgError::Import(format!("duplicate entity key for {}", e.id)));
            }
            g.adjacency.push(Vec::new());
            g.similar_root.push(e.id.0);
        }
        g.entities = entities;
        for r in relations {
            let (a, b) = r.kind.endpoints();
            let ok = matches!((g.entity(r.src), g.entity(r.dst)), (Some(s), Some(d)) if s.kind == a && d.kind == b);
            if !ok {
                return Err(EkgError::Import(format!("invalid {} edge {} -> {}", r.kind, r.src, r.dst)));
            }
            g.push_relation(r);
        }
        Ok(g)
    }

    pub fn counts(&self) -> Counts {
        let mut c = Counts::default();
        for k in EntityKind::ALL {
            c.entities.insert(k, 0);
        }
        for k in RelationKind::ALL {
            c.relations.insert(k, 0);
        }
        for e in &self.entities {
            *c.entities.entry(e.kind).or_default() += 1;
        }
        for r in &self.relations {
            *c.relations.entry(r.kind).or_default() += 1;
        }
        c
    }
}

/// Entity and relationship totals per kind.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub entities: BTreeMap<EntityKind, usize>,
    pub relations: BTreeMap<RelationKind, usize>,
}

impl Counts {
    /// Four entity columns and five relationship columns; similar and
    /// order CNT-CNT edges share one column, with the split listed below.
    pub fn table(&self) -> String {
        let e = |k| self.entities.get(&k).copied().unwrap_or(0);
        let r = |k| self.relations.get(&k).copied().unwrap_or(0);
        use RelationKind::*;
        let header = ["CNT", "WID", "OPT", "TXT", "TXT-TXT", "CNT-OPT", "CNT-TXT", "CNT-WID", "CNT-CNT"];
        let values = [
            e(EntityKind::Cnt),
            e(EntityKind::Wid),
            e(EntityKind::Opt),
            e(EntityKind::Txt),
            r(TxtTxtSimilar),
            r(CntOptOperate),
            r(CntTxtConcreteText),
            r(CntWidConcreteWidget),
            r(CntCntSimilar) + r(CntCntOrder),
        ];
        let mut s = String::new();
        s.push_str(&header.iter().map(|h| format!("{h:>8}")).collect::<String>());
        s.push('\n');
        s.push_str(&values.iter().map(|v| format!("{v:>8}")).collect::<String>());
        s.push('\n');
        s.push_str(&format!("CNT-CNT: {} similar, {} order\n", r(CntCntSimilar), r(CntCntOrder)));
        s
    }
}
