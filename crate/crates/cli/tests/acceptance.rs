//! Acceptance suite: one PASS/FAIL line per criterion.

#[path = "../../core/tests/common/mod.rs"]
mod core_common;

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use proptest::test_runner::{Config, TestRunner};
use scengraph::ekg::Origin;
use scengraph::engine::{run_scenario, RunLimits, Termination};
use scengraph::eval::{covered_subs, gen_rate, percent, random_baseline, scen_cov, test_ops, RandomPool, ScenOp};
use scengraph::text::{parse_step, OpTriple};
use scengraph::{EntityKind, Operation, RelationKind, TextAnalyzer};

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn within(t: Instant, limit: f64) -> Result<Duration, String> {
    let e = t.elapsed();
    if e.as_secs_f64() >= limit {
        return Err(format!("took {:.2}s, limit {limit}s", e.as_secs_f64()));
    }
    Ok(e)
}

fn illustrative() -> Check {
    let t = Instant::now();
    let a = TextAnalyzer::default();
    let s = "input the username 'admin' and password '123456', and then click on the Login button";
    let triples = parse_step(&a, &a.segment(s)).map_err(|e| e.to_string())?;
    let want = vec![
        OpTriple::new(Operation::Input, "username", Some("admin")),
        OpTriple::new(Operation::Input, "password", Some("123456")),
        OpTriple::new(Operation::Click, "login button", None),
    ];
    ensure!(triples == want, "triples {triples:?}");

    let (g, _) = core_common::graph("illustrative");
    let mut screen: BTreeMap<EntityKind, usize> = BTreeMap::new();
    let mut ops = 0;
    for e in g.entities() {
        let at = |o| e.provenance.iter().any(|p| p.report_id == "report-1" && p.step == 3 && p.origin == o);
        if at(Origin::Screen) {
            *screen.entry(e.kind).or_default() += 1;
        }
        ops += (e.kind == EntityKind::Opt && at(Origin::Text)) as usize;
    }
    let roster = [EntityKind::Cnt, EntityKind::Wid, EntityKind::Txt].map(|k| screen.get(&k).copied().unwrap_or(0));
    ensure!(roster == [3, 2, 3] && ops == 2, "step-3 roster CNT/WID/TXT {roster:?}, OPT {ops}");

    let txt = |l: &str, o| g.find(EntityKind::Txt, l, Some(o)).ok_or(format!("no TXT {l:?}"));
    let (login_s, login_t, sign_in) =
        (txt("login", Origin::Screen)?, txt("login", Origin::Text)?, txt("sign in", Origin::Screen)?);
    ensure!(g.similar_connected(login_s, sign_in), "login and sign-in texts not linked");
    let triangle = g.relations().iter().any(|r| {
        r.kind == RelationKind::TxtTxtSimilar && (r.src, r.dst) == (login_s.min(login_t), login_s.max(login_t))
    });
    ensure!(!triangle, "login triangle present");
    let e = within(t, 1.0)?;
    Ok(format!("3 triples, roster 3/2/2/3, link present, triangle absent ({} ms)", e.as_millis()))
}

fn ledger() -> Check {
    let t = Instant::now();
    let live = core_common::ledger("login10");
    let frozen = core_common::frozen("login10");
    ensure!(live == frozen, "counts differ:\n{live:#}\nvs\n{frozen:#}");
    let e = within(t, 5.0)?;
    Ok(format!("{} ({} ms)", live["entities"], e.as_millis()))
}

fn query_properties() -> Check {
    let t = Instant::now();
    let mut runner = TestRunner::new(Config { cases: 1000, failure_persistence: None, ..Config::default() });
    runner.run(&core_common::props::case(), |c| core_common::props::check(&c)).map_err(|e| e.to_string())?;
    let positive = core_common::props::POSITIVE.load(std::sync::atomic::Ordering::Relaxed);
    Ok(format!("1000 cases, 0 violations, {positive} positive candidates ({} ms)", t.elapsed().as_millis()))
}

fn roundtrip() -> Check {
    let t = Instant::now();
    let apps = core_common::fixture_apps();
    let screens: usize = apps.iter().map(|a| a.screens.len()).sum();
    let widgets: usize = apps.iter().map(core_common::check_app_roundtrip).sum();
    let e = within(t, 10.0)?;
    Ok(format!("{} apps, {screens} screens, {widgets} widgets ({} ms)", apps.len(), e.as_millis()))
}

const HOLDOUTS: [(&str, &str, &str); 3] = [
    ("holdout/login-holdout", "login10", "login"),
    ("holdout/register-holdout", "register", "register"),
    ("holdout/flight-holdout", "flight", "flight"),
];

fn holdout_coverage() -> Check {
    let a = TextAnalyzer::default();
    let mut out = Vec::new();
    for (app, corpus, seeds) in HOLDOUTS {
        let t = Instant::now();
        let model = core_common::app(app);
        let reports = scengraph::load_corpus(&core_common::fixtures().join("corpus").join(corpus)).unwrap();
        ensure!(reports.iter().all(|r| r.app_id != model.app_id), "{app} was used for construction");
        let (g, _) = core_common::graph(corpus);
        let golden = core_common::golden(app);
        ensure!(golden.subs.len() >= 3, "{app}: only {} golden sub-scenarios", golden.subs.len());
        let r = run_scenario(&model, &g, &a, &core_common::seeds(seeds), RunLimits::default())
            .map_err(|e| e.to_string())?;
        let ops = test_ops(&golden, &r);
        let cov = covered_subs(&golden, &r);
        ensure!(ops == golden.total_ops(), "{app}: GenRate {ops}/{}", golden.total_ops());
        ensure!(cov == golden.ids(), "{app}: ScenCov {}/{}", cov.len(), golden.subs.len());
        ensure!(r.subs.iter().all(|s| s.termination == Termination::Finished), "{app}: cases {:?}", r.case_counts());
        let e = within(t, 10.0).map_err(|m| format!("{app}: {m}"))?;
        out.push(format!("{} {ops}/{ops} {}/{} ({} ms)", model.app_id, cov.len(), cov.len(), e.as_millis()));
    }
    Ok(out.join(", "))
}

fn bug_detection() -> Check {
    let t = Instant::now();
    let a = TextAnalyzer::default();
    let limits = RunLimits { sweep_invalid: true, ..RunLimits::default() };
    let mut budget_needed = 0;
    let mut found = Vec::new();
    for (app, corpus, seeds) in HOLDOUTS {
        let model = core_common::app(app);
        let (g, _) = core_common::graph(corpus);
        let r = run_scenario(&model, &g, &a, &core_common::seeds(seeds), limits).map_err(|e| e.to_string())?;
        let planted: BTreeSet<String> = model.bugs.iter().filter(|b| b.on_scenario).map(|b| b.id.clone()).collect();
        let missed: Vec<_> = planted.difference(&r.crashes).collect();
        ensure!(missed.is_empty(), "{app}: engine missed {missed:?}");
        found.extend(planted);
        let events =
            r.subs.iter().map(|s| s.log.len()).sum::<usize>() + r.sweeps.iter().map(|s| s.run.log.len()).sum::<usize>();
        budget_needed = budget_needed.max(events);
    }
    ensure!(found.iter().any(|b| b == "blank-holder"), "deep blank-holder bug not among planted bugs");

    let budget = 500;
    ensure!(budget_needed <= budget, "engine used {budget_needed} events, more than the baseline budget {budget}");
    let flight = core_common::app("holdout/flight-holdout");
    let seeds = core_common::baseline_seeds();
    ensure!(seeds.len() == 20, "{} baseline seeds", seeds.len());
    let pool = RandomPool::default();
    let (mut deep_missed, mut shallow_found) = (0, 0);
    for s in &seeds {
        let r = random_baseline(&flight, budget, *s, &pool);
        deep_missed += !r.bugs.contains("blank-holder") as usize;
        shallow_found += r.bugs.contains("feedback-crash") as usize;
    }
    ensure!(deep_missed >= 18, "baseline found the deep bug in {} of 20 seeds", 20 - deep_missed);
    ensure!(shallow_found >= 19, "baseline found the shallow bug in only {shallow_found} of 20 seeds");
    let e = within(t, 60.0)?;
    Ok(format!(
        "engine {}/{} planted; baseline misses deep {deep_missed}/20, finds shallow {shallow_found}/20 ({} ms)",
        found.len(),
        found.len(),
        e.as_millis()
    ))
}

fn metric_formulas() -> Check {
    let f = |x: f64| format!("{x:.2}");
    let ops = |n: usize| -> Vec<ScenOp> {
        (0..n).map(|i| ScenOp { widget: format!("w{i}"), op: Operation::Click, param: None }).collect()
    };
    let req = ops(192);
    let mut gen = req.clone();
    gen[163].widget = "x".into();
    let g = gen_rate(&req, &gen).map_err(|e| e.to_string())?;
    ensure!(f(g) == "84.90" && f(percent(163, 192)) == "84.90", "GenRate {}", f(g));
    let all: BTreeSet<String> = (0..67).map(|i| format!("s{i}")).collect();
    let cov: BTreeSet<String> = all.iter().take(55).cloned().collect();
    let c = scen_cov(&all, &cov).map_err(|e| e.to_string())?;
    ensure!(f(c) == "82.09", "ScenCov {}", f(c));
    let five = ops(5);
    let mut bad = five.clone();
    bad[2].widget = "x".into();
    let cascade = gen_rate(&five, &bad).map_err(|e| e.to_string())?;
    ensure!(cascade == 40.0, "cascade {cascade}");
    Ok("163/192 = 84.90, 55/67 = 82.09, cascade 40.00".into())
}

fn determinism() -> Check {
    let t = Instant::now();
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    common::pipeline(a.path(), 1);
    common::pipeline(b.path(), 1);
    let (x, y) = (common::outputs_modulo_header(a.path()), common::outputs_modulo_header(b.path()));
    ensure!(x.keys().eq(y.keys()), "file sets differ");
    let differing: Vec<&String> = x.keys().filter(|k| x[*k] != y[*k]).collect();
    ensure!(differing.is_empty(), "files differ: {differing:?}");
    let raw_a = std::fs::read_to_string(a.path().join("eval/metrics.json")).unwrap();
    ensure!(raw_a.lines().filter(|l| l.contains("\"generated\"")).count() == 1, "metrics header count");
    Ok(format!("{} files identical modulo header ({} ms)", x.len(), t.elapsed().as_millis()))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("illustrative-example fidelity", illustrative),
        ("ledger equivalence", ledger),
        ("query properties", query_properties),
        ("render/extract round trip", roundtrip),
        ("holdout GenRate and ScenCov", holdout_coverage),
        ("planted bugs versus random baseline", bug_detection),
        ("metric formulas", metric_formulas),
        ("pipeline determinism", determinism),
    ];
    let quiet = std::panic::take_hook();
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let r = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Err(format!("panicked: {msg}"))
        });
        match r {
            Ok(detail) => println!("PASS {} {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {} {name}: {why}", i + 1);
            }
        }
    }
    std::panic::set_hook(quiet);
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
