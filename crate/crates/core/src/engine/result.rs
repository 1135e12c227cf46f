use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::sim::LogRecord;

use super::{EngineError, Termination, TestEvent};

pub const RESULT_FORMAT: &str = "scengraph-run/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubScenarioRun {
    pub index: usize,
    /// Length of the replayed prefix this run was recalled to; 0 for a
    /// fresh launch.
    pub replayed: usize,
    pub termination: Termination,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub anomaly: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub crash: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    pub events: Vec<TestEvent>,
    /// Full session log from launch.
    pub log: Vec<LogRecord>,
}

/// Continuation after feeding the invalid seed variant to one input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRun {
    pub sub: usize,
    /// 1-based position of the perturbed input within the sub-scenario.
    pub step: usize,
    pub seed_key: String,
    pub run: SubScenarioRun,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioRunResult {
    pub format: String,
    pub app_id: String,
    pub scenario_id: String,
    pub subs: Vec<SubScenarioRun>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sweeps: Vec<SweepRun>,
    pub crashes: BTreeSet<String>,
    pub completed: usize,
    pub reinitializations: usize,
    #[serde(skip)]
    pub wall_ms: u64,
}

impl ScenarioRunResult {
    pub fn new(app_id: &str, scenario_id: &str) -> Self {
        ScenarioRunResult {
            format: RESULT_FORMAT.into(),
            app_id: app_id.into(),
            scenario_id: scenario_id.into(),
            subs: Vec::new(),
            sweeps: Vec::new(),
            crashes: BTreeSet::new(),
            completed: 0,
            reinitializations: 0,
            wall_ms: 0,
        }
    }

    pub(crate) fn push(&mut self, sub: SubScenarioRun) {
        if sub.termination == Termination::Finished {
            self.completed += 1;
        }
        if let Some(b) = &sub.crash {
            self.crashes.insert(b.clone());
        }
        self.subs.push(sub);
    }

    pub fn case_counts(&self) -> [usize; 3] {
        let mut c = [0; 3];
        for s in &self.subs {
            c[s.termination.number() as usize - 1] += 1;
        }
        c
    }
}

/// Pretty JSON with a single `generated` line right after the opening brace;
/// it carries the timestamp and wall time and is the only line that varies
/// between identical runs.
pub fn write_result(r: &ScenarioRunResult, timestamp: &str) -> String {
    let body = serde_json::to_string_pretty(r).expect("result serializes");
    let stamp = serde_json::to_string(&format!("{timestamp} wall_ms={}", r.wall_ms)).unwrap();
    format!("{{\n  \"generated\": {stamp},{}\n", &body[1..])
}

pub fn read_result(src: &str) -> Result<ScenarioRunResult, EngineError> {
    #[derive(Deserialize)]
    struct Stamped {
        #[serde(default)]
        generated: Option<String>,
        #[serde(flatten)]
        result: ScenarioRunResult,
    }
    let s: Stamped = serde_json::from_str(src).map_err(|e| EngineError::Result(e.to_string()))?;
    let mut r = s.result;
    if r.format != RESULT_FORMAT {
        return Err(EngineError::Result(format!("unsupported format {:?}", r.format)));
    }
    r.wall_ms = s.generated.and_then(|g| g.rsplit_once("wall_ms=").and_then(|(_, n)| n.parse().ok())).unwrap_or(0);
    Ok(r)
}
