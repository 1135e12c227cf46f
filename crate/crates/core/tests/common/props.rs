//! Random (graph, screen, context) cases for query properties.

use std::sync::atomic::{AtomicUsize, Ordering};

use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

use scengraph::ekg::{NewEntity, Origin, QueryEngine, WidgetCandidate};
use scengraph::screen::{GuiStructure, GuiWidget, LayoutTree};
use scengraph::{BBox, Ekg, EntityId, EntityKind, Operation, RelationKind, TextAnalyzer, WidgetType, DEFAULT_THETA};

const VOCAB: &[&str] = &[
    "login",
    "sign in",
    "username",
    "user name",
    "password",
    "pwd",
    "phone",
    "mobile number",
    "code",
    "sms code",
    "menu",
    "email",
    "e-mail",
    "register",
    "sign up",
    "search",
    "find",
    "book",
    "reserve",
    "settings",
    "news",
    "banner",
    "profile",
    "help",
    "next",
    "agree",
    "submit",
];

/// Positive-probability candidates seen so far.
pub static POSITIVE: AtomicUsize = AtomicUsize::new(0);

const TYPES: &[WidgetType] =
    &[WidgetType::Button, WidgetType::TextField, WidgetType::TextView, WidgetType::Icon, WidgetType::Checkbox];

#[derive(Debug, Clone)]
struct CntSpec {
    label: usize,
    wid: Option<usize>,
    txt: Option<usize>,
    op: usize,
    start: bool,
    tail: bool,
}

#[derive(Debug, Clone)]
pub struct Case {
    cnts: Vec<CntSpec>,
    orders: Vec<(usize, usize)>,
    similars: Vec<(usize, usize)>,
    widgets: Vec<(usize, Option<usize>)>,
    last: Option<usize>,
}

pub fn case() -> impl Strategy<Value = Case> {
    let cnt = (
        0..VOCAB.len(),
        prop::option::of(0..TYPES.len()),
        prop::option::of(0..VOCAB.len()),
        0..4usize,
        any::<bool>(),
        any::<bool>(),
    )
        .prop_map(|(label, wid, txt, op, start, tail)| CntSpec { label, wid, txt, op, start, tail });
    (prop::collection::vec(cnt, 2..10), 0..12usize)
        .prop_flat_map(|(cnts, _)| {
            let n = cnts.len();
            (
                Just(cnts),
                prop::collection::vec((0..n, 0..n), 0..14),
                prop::collection::vec((0..n, 0..n), 0..3),
                prop::collection::vec((0..TYPES.len(), prop::option::of(0..VOCAB.len())), 1..8),
                prop::option::of(0..n),
            )
        })
        .prop_map(|(cnts, orders, similars, widgets, last)| Case { cnts, orders, similars, widgets, last })
}

fn build(c: &Case) -> (Ekg, Vec<EntityId>) {
    let mut g = Ekg::new("Prop");
    let ops = [Operation::Click, Operation::Input, Operation::Choose, Operation::Check];
    let mut ids = Vec::new();
    for (i, s) in c.cnts.iter().enumerate() {
        let mut e = NewEntity::new(EntityKind::Cnt, VOCAB[s.label]);
        if i == 0 || s.start {
            e = e.start();
        }
        if s.tail {
            e = e.tail();
        }
        let id = g.append_entity(e).unwrap();
        let op = g.append_entity(NewEntity::new(EntityKind::Opt, ops[s.op].name())).unwrap();
        g.append_relation(id, op, RelationKind::CntOptOperate, None).unwrap();
        if let Some(t) = s.txt {
            let t = g.append_entity(NewEntity::new(EntityKind::Txt, VOCAB[t]).origin(Origin::Text)).unwrap();
            g.append_relation(id, t, RelationKind::CntTxtConcreteText, None).unwrap();
        }
        if let Some(w) = s.wid {
            let w = g.append_entity(NewEntity::new(EntityKind::Wid, &TYPES[w].name().to_lowercase())).unwrap();
            g.append_relation(id, w, RelationKind::CntWidConcreteWidget, None).unwrap();
        }
        ids.push(id);
    }
    for &(a, b) in &c.orders {
        g.append_relation(ids[a], ids[b], RelationKind::CntCntOrder, None).unwrap();
    }
    for &(a, b) in &c.similars {
        g.append_relation(ids[a], ids[b], RelationKind::CntCntSimilar, Some(1.0)).unwrap();
    }
    g.recompute_branch_points();
    (g, ids)
}

fn screen(widgets: &[(usize, Option<String>)]) -> GuiStructure {
    let widgets = widgets
        .iter()
        .enumerate()
        .map(|(i, (t, text))| GuiWidget {
            bbox: BBox::new(10, 10 + 22 * i as u32, 110, 26 + 22 * i as u32),
            widget_type: TYPES[*t],
            text: text.clone(),
        })
        .collect();
    GuiStructure { width: 120, height: 200, widgets, standalone_texts: Vec::new(), layout: LayoutTree::default() }
}

/// Another member of the label's synonym group, when it has one.
fn synonym(a: &TextAnalyzer, label: &str) -> String {
    let lex = a.lexicon();
    match lex.group_of(label) {
        Some(g) => lex.groups()[g].iter().find(|t| t.as_str() != label).cloned().unwrap_or_else(|| label.into()),
        None => label.into(),
    }
}

/// Zero probability exactly when no reachable entity matches; positive
/// probabilities are attained similarities; synonym relabelling leaves the
/// ranking unchanged.
pub fn check(c: &Case) -> Result<(), TestCaseError> {
    let a = TextAnalyzer::default();
    let (g, ids) = build(c);
    let engine = QueryEngine::new(&g, &a, DEFAULT_THETA);
    let labels: Vec<(usize, Option<String>)> =
        c.widgets.iter().map(|(t, l)| (*t, l.map(|l| VOCAB[l].to_string()))).collect();
    let gui = screen(&labels);
    let last = c.last.map(|i| ids[i]);
    let reach = engine.reachable(last);
    let out = engine.query(&gui, last);

    for (wi, w) in gui.widgets.iter().enumerate() {
        let sims: Vec<(EntityId, f64)> =
            g.entities_of(EntityKind::Cnt).map(|e| (e.id, engine.similarity(w, e.id))).collect();
        let any = sims.iter().any(|(_, s)| *s >= DEFAULT_THETA);
        let best_reach = sims.iter().filter(|(id, _)| reach.contains(id)).map(|(_, s)| *s).fold(0.0, f64::max);
        let cand: Vec<_> = out.iter().filter(|x| x.widget == wi).collect();
        prop_assert!(cand.len() <= 1);
        prop_assert_eq!(cand.len() == 1, any);
        if let Some(x) = cand.first() {
            // zero exactly when nothing reachable matches
            prop_assert_eq!(x.probability > 0.0, best_reach >= DEFAULT_THETA);
            prop_assert_eq!(x.probability > 0.0, reach.contains(&x.entity));
            if x.probability > 0.0 {
                prop_assert_eq!(x.probability, best_reach);
                prop_assert_eq!(x.probability, engine.similarity(w, x.entity));
            }
        }
    }

    let swapped: Vec<(usize, Option<String>)> =
        labels.iter().map(|(t, l)| (*t, l.as_ref().map(|l| synonym(&a, l)))).collect();
    let out2 = engine.query(&screen(&swapped), last);
    POSITIVE.fetch_add(out.iter().filter(|x| x.probability > 0.0).count(), Ordering::Relaxed);
    let top = |v: &[WidgetCandidate]| v.first().map(|x| (x.widget, x.entity, x.probability));
    prop_assert_eq!(top(&out), top(&out2));
    let key =
        |v: &[WidgetCandidate]| v.iter().map(|x| (x.widget, x.entity, x.probability, x.operation)).collect::<Vec<_>>();
    prop_assert_eq!(key(&out), key(&out2));
    Ok(())
}
