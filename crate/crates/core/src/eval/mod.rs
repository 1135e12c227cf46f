//! Adequacy metrics over golden operation sequences, bug-set differencing,
//! and a seeded random baseline.

mod baseline;
mod report;

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::ScenarioRunResult;
use crate::text::Operation;

pub use baseline::{random_baseline, BaselineRun, RandomPool};
pub use report::{evaluate_app, Aggregate, AppMetrics, CountPercent, MetricReport, METRICS_FORMAT};

pub const GOLDEN_FORMAT: &str = "scengraph-golden/1";

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("metric input: {0}")]
    MetricInput(String),
    #[error("golden file {path}: {message}")]
    Golden { path: String, message: String },
    #[error("write {path}: {message}")]
    Output { path: String, message: String },
}

/// One required operation bound to a declared widget.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenOp {
    pub widget: String,
    pub op: Operation,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub param: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GoldenSub {
    pub id: String,
    pub ops: Vec<ScenOp>,
}

/// Authored sub-scenario paths of one (app, scenario).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GoldenSet {
    pub format: String,
    pub app_id: String,
    pub scenario: String,
    pub subs: Vec<GoldenSub>,
}

impl GoldenSet {
    pub fn from_toml(src: &str, path: &str) -> Result<Self, EvalError> {
        let err = |message: String| EvalError::Golden { path: path.into(), message };
        let g: GoldenSet = toml::from_str(src).map_err(|e| err(e.to_string()))?;
        if g.format != GOLDEN_FORMAT {
            return Err(err(format!("unsupported format {:?}", g.format)));
        }
        if g.subs.is_empty() {
            return Err(err("no sub-scenarios".into()));
        }
        let mut ids = BTreeSet::new();
        for s in &g.subs {
            if s.ops.is_empty() {
                return Err(err(format!("sub-scenario {:?} has no operations", s.id)));
            }
            if !ids.insert(&s.id) {
                return Err(err(format!("duplicate sub-scenario {:?}", s.id)));
            }
            for o in &s.ops {
                if o.op.takes_parameter() != o.param.is_some() {
                    return Err(err(format!("{:?}: {} parameter arity mismatch", s.id, o.op)));
                }
            }
        }
        Ok(g)
    }

    pub fn load(path: &Path) -> Result<Self, EvalError> {
        let p = path.display().to_string();
        let src =
            std::fs::read_to_string(path).map_err(|e| EvalError::Golden { path: p.clone(), message: e.to_string() })?;
        Self::from_toml(&src, &p)
    }

    pub fn total_ops(&self) -> usize {
        self.subs.iter().map(|s| s.ops.len()).sum()
    }

    pub fn ids(&self) -> BTreeSet<String> {
        self.subs.iter().map(|s| s.id.clone()).collect()
    }
}

/// Generated operation in comparable form.
pub trait AsScenOp {
    fn scen_op(&self) -> ScenOp;
}

impl AsScenOp for ScenOp {
    fn scen_op(&self) -> ScenOp {
        self.clone()
    }
}

impl AsScenOp for crate::engine::TestEvent {
    fn scen_op(&self) -> ScenOp {
        ScenOp { widget: self.widget_id.clone(), op: self.operation, param: self.parameter.clone() }
    }
}

impl AsScenOp for crate::sim::LogRecord {
    fn scen_op(&self) -> ScenOp {
        ScenOp { widget: self.widget_id.clone(), op: self.operation, param: self.parameter.clone() }
    }
}

/// Length of the exactly matching prefix; everything after the first
/// mismatch counts as failed.
pub fn matched_prefix<E: AsScenOp>(required: &[ScenOp], generated: &[E]) -> usize {
    required.iter().zip(generated).take_while(|(r, g)| **r == g.scen_op()).count()
}

pub fn percent(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        100.0 * num as f64 / den as f64
    }
}

pub fn gen_rate<E: AsScenOp>(required: &[ScenOp], generated: &[E]) -> Result<f64, EvalError> {
    if required.is_empty() {
        return Err(EvalError::MetricInput("empty required operation sequence".into()));
    }
    Ok(percent(matched_prefix(required, generated), required.len()))
}

pub fn scen_cov(all_subs: &BTreeSet<String>, covered: &BTreeSet<String>) -> Result<f64, EvalError> {
    if all_subs.is_empty() {
        return Err(EvalError::MetricInput("no sub-scenarios".into()));
    }
    if let Some(x) = covered.difference(all_subs).next() {
        return Err(EvalError::MetricInput(format!("covered sub-scenario {x:?} is not in the scenario")));
    }
    Ok(percent(covered.len(), all_subs.len()))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BugDiff<T: Ord> {
    pub only_engine: BTreeSet<T>,
    pub both: BTreeSet<T>,
    pub only_baseline: BTreeSet<T>,
}

pub fn bug_diff<T: Ord + Clone>(engine: &BTreeSet<T>, baseline: &BTreeSet<T>) -> BugDiff<T> {
    BugDiff {
        only_engine: engine.difference(baseline).cloned().collect(),
        both: engine.intersection(baseline).cloned().collect(),
        only_baseline: baseline.difference(engine).cloned().collect(),
    }
}

/// Golden sub-scenarios reproduced exactly, start to end, by a finished
/// engine run.
pub fn covered_subs(golden: &GoldenSet, run: &ScenarioRunResult) -> BTreeSet<String> {
    use crate::engine::Termination;
    golden
        .subs
        .iter()
        .filter(|g| {
            run.subs.iter().any(|s| {
                s.termination == Termination::Finished
                    && s.events.len() == g.ops.len()
                    && matched_prefix(&g.ops, &s.events) == g.ops.len()
            })
        })
        .map(|g| g.id.clone())
        .collect()
}

/// Matched operations summed over golden sub-scenarios, each credited with
/// its best-aligned engine run.
pub fn test_ops(golden: &GoldenSet, run: &ScenarioRunResult) -> usize {
    golden.subs.iter().map(|g| run.subs.iter().map(|s| matched_prefix(&g.ops, &s.events)).max().unwrap_or(0)).sum()
}
