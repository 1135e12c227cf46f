//! Graph-guided exploration: analyze the current screen, query the graph,
//! operate the single most probable widget, and cover every sub-scenario
//! depth first with reinitialization at recorded branch points.

mod result;
mod run;
mod seeds;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::ScreenBundle;
use crate::ekg::{Ekg, EntityId, QueryEngine, RelationKind, WidgetCandidate};
use crate::screen::{analyze_bundle, BBox, GuiStructure};
use crate::sim::SimError;
use crate::text::{Operation, TextAnalyzer};

pub use result::{read_result, write_result, ScenarioRunResult, SubScenarioRun, SweepRun, RESULT_FORMAT};
pub use run::{run_scenario, BranchFrame, RunLimits, DEFAULT_STEP_CAP};
pub use seeds::{SeedEntry, Seeds, SEEDS_FORMAT};

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("no seed for input on {entity:?}")]
    SeedMissing { entity: String },
    #[error("run aborted after {events} events in sub-scenario {sub} (step cap {cap})")]
    RunAborted { cap: usize, sub: usize, events: usize, partial: Box<ScenarioRunResult> },
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("graph scenario {graph:?} does not match app scenario {app:?}")]
    ScenarioMismatch { graph: String, app: String },
    #[error("no declared widget under detected box {bbox} on screen {screen:?}")]
    WidgetUnresolved { screen: String, bbox: BBox },
    #[error("seeds: {0}")]
    Seeds(String),
    #[error("run result: {0}")]
    Result(String),
}

/// One executed event with the graph knowledge that chose it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestEvent {
    pub screen_id: String,
    pub widget_id: String,
    pub bbox: BBox,
    pub text: Option<String>,
    pub operation: Operation,
    pub parameter: Option<String>,
    pub probability: f64,
    pub entity: EntityId,
    pub tail: bool,
    /// Seed key that supplied the parameter, when one did.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed_key: Option<String>,
}

/// Events executed since the last reinitialization.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TestContext {
    pub events: Vec<TestEvent>,
}

impl TestContext {
    pub fn last_entity(&self) -> Option<EntityId> {
        self.events.last().map(|e| e.entity)
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Termination {
    /// Tail reached and nothing left to do: sub-scenario finished.
    #[serde(rename = "case1")]
    Finished,
    /// Further generation possible.
    #[serde(rename = "case2")]
    Continue,
    /// No tail and nothing reachable: the app conflicts with the graph.
    #[serde(rename = "case3")]
    Failed,
}

impl Termination {
    pub fn number(self) -> u8 {
        match self {
            Termination::Finished => 1,
            Termination::Continue => 2,
            Termination::Failed => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TerminationDecision {
    pub case: Termination,
    /// Tail reached while candidates remain; the sub-scenario ends anyway.
    pub anomaly: bool,
}

/// `last_tail` is `None` before the first event.
pub fn classify_termination(last_tail: Option<bool>, candidates: &[WidgetCandidate]) -> TerminationDecision {
    let any = candidates.iter().any(|c| c.probability > 0.0);
    let (case, anomaly) = match (last_tail.unwrap_or(false), any) {
        (true, false) => (Termination::Finished, false),
        (true, true) => (Termination::Finished, true),
        (false, true) => (Termination::Continue, false),
        (false, false) => (Termination::Failed, false),
    };
    TerminationDecision { case, anomaly }
}

pub fn analyze_state(bundle: &ScreenBundle, merge_threshold: f64) -> GuiStructure {
    analyze_bundle(bundle, merge_threshold)
}

/// Which seed variant to use for inputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SeedVariant {
    #[default]
    Valid,
    Invalid,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub candidate: WidgetCandidate,
    pub parameter: Option<String>,
    pub seed_key: Option<String>,
}

/// Strings naming what an input fills: the entity label, its attached
/// texts, the labels of its similar class, and the widget text.
fn seed_lookup_names(g: &Ekg, c: &WidgetCandidate) -> Vec<String> {
    let mut names = vec![g.entity(c.entity).map(|e| e.label.clone()).unwrap_or_default()];
    for t in g.neighbors(c.entity, RelationKind::CntTxtConcreteText) {
        names.push(g.entity(t).unwrap().label.clone());
    }
    for m in g.similar_class(c.entity) {
        names.push(g.entity(m).unwrap().label.clone());
    }
    if let Some(t) = &c.text {
        names.push(t.clone());
    }
    names
}

/// Best seed key for a candidate, if any reaches the threshold.
pub fn match_seed(analyzer: &TextAnalyzer, g: &Ekg, seeds: &Seeds, c: &WidgetCandidate, theta: f64) -> Option<String> {
    let names = seed_lookup_names(g, c);
    let mut best: Option<(&str, f64)> = None;
    for key in seeds.seeds.keys() {
        let s = names.iter().map(|n| analyzer.similarity(n, key)).fold(0.0, f64::max);
        if s >= theta && best.is_none_or(|(_, b)| s > b) {
            best = Some((key, s));
        }
    }
    best.map(|(k, _)| k.to_string())
}

/// Top candidate with positive probability, with its input filled from the
/// seeds (falling back to a literal recorded in the graph). `Ok(None)` when
/// no candidate survives.
pub fn select_action(
    structure: &GuiStructure,
    context: &TestContext,
    engine: &QueryEngine<'_>,
    analyzer: &TextAnalyzer,
    seeds: &Seeds,
    variant: SeedVariant,
) -> Result<Option<Selection>, EngineError> {
    let Some(candidate) = engine.query(structure, context.last_entity()).into_iter().find(|c| c.probability > 0.0)
    else {
        return Ok(None);
    };
    fill(engine.graph(), analyzer, seeds, candidate, variant, engine.theta()).map(Some)
}

pub(crate) fn fill(
    g: &Ekg,
    analyzer: &TextAnalyzer,
    seeds: &Seeds,
    candidate: WidgetCandidate,
    variant: SeedVariant,
    theta: f64,
) -> Result<Selection, EngineError> {
    if !candidate.operation.takes_parameter() {
        return Ok(Selection { candidate, parameter: None, seed_key: None });
    }
    if let Some(key) = match_seed(analyzer, g, seeds, &candidate, theta) {
        let entry = &seeds.seeds[&key];
        let value = match variant {
            SeedVariant::Valid => entry.valid.clone(),
            SeedVariant::Invalid => entry.invalid.clone().unwrap_or_else(|| entry.valid.clone()),
        };
        return Ok(Selection { candidate, parameter: Some(value), seed_key: Some(key) });
    }
    match candidate.parameter.clone() {
        Some(p) => Ok(Selection { candidate, parameter: Some(p), seed_key: None }),
        None => Err(EngineError::SeedMissing {
            entity: g.entity(candidate.entity).map(|e| e.label.clone()).unwrap_or_default(),
        }),
    }
}
