use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::engine::ScenarioRunResult;
use crate::sim::AppModel;

use super::{bug_diff, covered_subs, percent, scen_cov, test_ops, BaselineRun, BugDiff, EvalError, GoldenSet};

pub const METRICS_FORMAT: &str = "scengraph-metrics/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountPercent {
    pub num: usize,
    pub den: usize,
    pub percent: f64,
}

impl CountPercent {
    pub fn new(num: usize, den: usize) -> Self {
        CountPercent { num, den, percent: round2(percent(num, den)) }
    }
}

fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineSummary {
    pub seed: u64,
    pub budget: usize,
    pub events: usize,
    pub bugs: BTreeSet<String>,
    /// Baseline bugs that lie on scenario paths.
    pub scoped: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AppMetrics {
    pub app_id: String,
    pub scenario: String,
    /// TestOp over ScenOp.
    pub gen_rate: CountPercent,
    /// Explored over authored sub-scenarios.
    pub scen_cov: CountPercent,
    pub covered: BTreeSet<String>,
    pub case_counts: [usize; 3],
    pub planted_on_scenario: BTreeSet<String>,
    pub engine_bugs: BTreeSet<String>,
    pub engine_planted_recall: CountPercent,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub baseline: Option<BaselineSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diff: Option<BugDiff<String>>,
}

pub fn evaluate_app(
    app: &AppModel,
    golden: &GoldenSet,
    run: &ScenarioRunResult,
    baseline: Option<(&BaselineRun, usize)>,
) -> Result<AppMetrics, EvalError> {
    if golden.app_id != app.app_id || run.app_id != app.app_id {
        return Err(EvalError::MetricInput(format!(
            "app mismatch: model {:?}, golden {:?}, run {:?}",
            app.app_id, golden.app_id, run.app_id
        )));
    }
    let covered = covered_subs(golden, run);
    scen_cov(&golden.ids(), &covered)?;
    let planted: BTreeSet<String> = app.bugs.iter().filter(|b| b.on_scenario).map(|b| b.id.clone()).collect();
    let found_planted = run.crashes.intersection(&planted).count();
    let (baseline, diff) = match baseline {
        Some((b, budget)) => {
            let scoped: BTreeSet<String> =
                b.bugs.iter().filter(|id| app.bug(id).is_some_and(|s| s.on_scenario)).cloned().collect();
            let d = bug_diff(&run.crashes, &scoped);
            let s = BaselineSummary { seed: b.seed, budget, events: b.log.len(), bugs: b.bugs.clone(), scoped };
            (Some(s), Some(d))
        }
        None => (None, None),
    };
    Ok(AppMetrics {
        app_id: app.app_id.clone(),
        scenario: app.scenario.clone(),
        gen_rate: CountPercent::new(test_ops(golden, run), golden.total_ops()),
        scen_cov: CountPercent::new(covered.len(), golden.subs.len()),
        covered,
        case_counts: run.case_counts(),
        engine_planted_recall: CountPercent::new(found_planted, planted.len()),
        planted_on_scenario: planted,
        engine_bugs: run.crashes.clone(),
        baseline,
        diff,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub gen_rate_event_weighted: CountPercent,
    pub gen_rate_scenario_average: f64,
    pub scen_cov_event_weighted: CountPercent,
    pub scen_cov_scenario_average: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub format: String,
    pub apps: Vec<AppMetrics>,
    pub aggregate: Aggregate,
}

impl MetricReport {
    pub fn new(mut apps: Vec<AppMetrics>) -> Self {
        apps.sort_by(|a, b| (&a.scenario, &a.app_id).cmp(&(&b.scenario, &b.app_id)));
        let sum = |f: fn(&AppMetrics) -> &CountPercent| {
            let (n, d) = apps.iter().map(f).fold((0, 0), |(n, d), c| (n + c.num, d + c.den));
            CountPercent::new(n, d)
        };
        let avg = |f: fn(&AppMetrics) -> &CountPercent| {
            if apps.is_empty() {
                0.0
            } else {
                round2(apps.iter().map(|a| f(a).percent).sum::<f64>() / apps.len() as f64)
            }
        };
        let aggregate = Aggregate {
            gen_rate_event_weighted: sum(|a| &a.gen_rate),
            gen_rate_scenario_average: avg(|a| &a.gen_rate),
            scen_cov_event_weighted: sum(|a| &a.scen_cov),
            scen_cov_scenario_average: avg(|a| &a.scen_cov),
        };
        MetricReport { format: METRICS_FORMAT.into(), apps, aggregate }
    }

    /// Pretty JSON with one `generated` header line.
    pub fn to_json(&self, generated: &str) -> String {
        let body = serde_json::to_string_pretty(self).expect("metrics serialize");
        format!("{{\n  \"generated\": {},{}\n", serde_json::to_string(generated).unwrap(), &body[1..])
    }

    fn table(rows: Vec<Vec<String>>) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in rows {
            w.write_record(&r).expect("in-memory csv");
        }
        String::from_utf8(w.into_inner().expect("in-memory csv")).unwrap()
    }

    pub fn gen_rate_csv(&self) -> String {
        let mut rows =
            vec![vec!["app".into(), "scenario".into(), "scen_op".into(), "test_op".into(), "gen_rate".into()]];
        for a in &self.apps {
            let g = &a.gen_rate;
            rows.push(vec![
                a.app_id.clone(),
                a.scenario.clone(),
                g.den.to_string(),
                g.num.to_string(),
                fmt2(g.percent),
            ]);
        }
        let e = &self.aggregate.gen_rate_event_weighted;
        rows.push(vec!["sum".into(), "event-weighted".into(), e.den.to_string(), e.num.to_string(), fmt2(e.percent)]);
        rows.push(vec![
            "avg".into(),
            "scenario-average".into(),
            String::new(),
            String::new(),
            fmt2(self.aggregate.gen_rate_scenario_average),
        ]);
        Self::table(rows)
    }

    pub fn scen_cov_csv(&self) -> String {
        let mut rows = vec![vec!["app".into(), "scenario".into(), "scen".into(), "s_t".into(), "scen_cov".into()]];
        for a in &self.apps {
            let c = &a.scen_cov;
            rows.push(vec![
                a.app_id.clone(),
                a.scenario.clone(),
                c.den.to_string(),
                c.num.to_string(),
                fmt2(c.percent),
            ]);
        }
        let e = &self.aggregate.scen_cov_event_weighted;
        rows.push(vec!["sum".into(), "event-weighted".into(), e.den.to_string(), e.num.to_string(), fmt2(e.percent)]);
        rows.push(vec![
            "avg".into(),
            "scenario-average".into(),
            String::new(),
            String::new(),
            fmt2(self.aggregate.scen_cov_scenario_average),
        ]);
        Self::table(rows)
    }

    /// Columns: engine only, both, baseline only (scenario bugs).
    pub fn bugs_csv(&self) -> String {
        let mut rows = vec![vec![
            "app".into(),
            "engine_minus_baseline".into(),
            "baseline_and_engine".into(),
            "baseline_minus_engine_scenario".into(),
            "baseline_total".into(),
        ]];
        for a in &self.apps {
            let (Some(d), Some(b)) = (&a.diff, &a.baseline) else {
                rows.push(vec![
                    a.app_id.clone(),
                    a.engine_bugs.len().to_string(),
                    String::new(),
                    String::new(),
                    String::new(),
                ]);
                continue;
            };
            rows.push(vec![
                a.app_id.clone(),
                d.only_engine.len().to_string(),
                d.both.len().to_string(),
                d.only_baseline.len().to_string(),
                b.bugs.len().to_string(),
            ]);
        }
        Self::table(rows)
    }

    pub fn write_dir(&self, dir: &Path, generated: &str) -> Result<(), EvalError> {
        let files = [
            ("metrics.json", self.to_json(generated)),
            ("genrate.csv", self.gen_rate_csv()),
            ("scencov.csv", self.scen_cov_csv()),
            ("bugs.csv", self.bugs_csv()),
        ];
        std::fs::create_dir_all(dir)
            .map_err(|e| EvalError::Output { path: dir.display().to_string(), message: e.to_string() })?;
        for (name, body) in files {
            let p = dir.join(name);
            std::fs::write(&p, body)
                .map_err(|e| EvalError::Output { path: p.display().to_string(), message: e.to_string() })?;
        }
        Ok(())
    }
}

fn fmt2(x: f64) -> String {
    format!("{x:.2}")
}
