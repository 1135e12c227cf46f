mod common;

use std::time::Instant;

use common::SUBJECTS;
use scengraph::ekg::QueryEngine;
use scengraph::engine::{
    analyze_state, run_scenario, select_action, EngineError, RunLimits, SeedVariant, Termination, TestContext,
};
use scengraph::eval::{covered_subs, test_ops};
use scengraph::{EntityKind, TextAnalyzer, DEFAULT_THETA};

fn limits(sweep: bool) -> RunLimits {
    RunLimits { sweep_invalid: sweep, ..RunLimits::default() }
}

#[test]
fn holdout_runs_reproduce_goldens() {
    let a = TextAnalyzer::default();
    for s in &SUBJECTS {
        let t = Instant::now();
        let (app, (g, _), seeds, golden) =
            (common::app(s.app), common::graph(s.corpus), common::seeds(s.seeds), common::golden(s.app));
        let r = run_scenario(&app, &g, &a, &seeds, limits(false)).unwrap();
        assert_eq!(r.subs.len(), golden.subs.len(), "{}", s.app);
        assert!(
            r.subs.iter().all(|x| x.termination == Termination::Finished && !x.anomaly),
            "{}: {:?}",
            s.app,
            r.case_counts()
        );
        assert_eq!(test_ops(&golden, &r), golden.total_ops(), "{}", s.app);
        assert_eq!(covered_subs(&golden, &r), golden.ids(), "{}", s.app);
        assert!(t.elapsed().as_secs_f64() < 10.0);
    }
}

#[test]
fn sweep_reveals_planted_bugs() {
    let a = TextAnalyzer::default();
    for s in &SUBJECTS {
        let (app, (g, _), seeds) = (common::app(s.app), common::graph(s.corpus), common::seeds(s.seeds));
        let r = run_scenario(&app, &g, &a, &seeds, limits(true)).unwrap();
        for b in app.bugs.iter().filter(|b| b.on_scenario) {
            assert!(r.crashes.contains(&b.id), "{}: {} not found", s.app, b.id);
        }
        for sw in &r.sweeps {
            if let Some(bug) = &sw.run.crash {
                assert_eq!(sw.run.termination, Termination::Failed);
                assert!(app.bug(bug).is_some());
            }
        }
        // primaries are unaffected by the sweep
        assert!(r.subs.iter().all(|x| x.termination == Termination::Finished));
    }
}

#[test]
fn deep_blank_holder_found_only_with_invalid_seeds() {
    let a = TextAnalyzer::default();
    let (app, (g, _), seeds) =
        (common::app("holdout/flight-holdout"), common::graph("flight"), common::seeds("flight"));
    let plain = run_scenario(&app, &g, &a, &seeds, limits(false)).unwrap();
    assert!(plain.crashes.is_empty());
    let swept = run_scenario(&app, &g, &a, &seeds, limits(true)).unwrap();
    let hit = swept.sweeps.iter().find(|s| s.run.crash.as_deref() == Some("blank-holder")).unwrap();
    assert_eq!(hit.seed_key, "passenger name");
    assert!(!swept.crashes.contains("feedback-crash"));
}

#[test]
fn step_cap_aborts_with_partial_result() {
    let a = TextAnalyzer::default();
    let (app, (g, _), seeds) = (common::app("holdout/login-holdout"), common::graph("login10"), common::seeds("login"));
    let err = run_scenario(&app, &g, &a, &seeds, RunLimits { step_cap: 2, ..RunLimits::default() }).unwrap_err();
    match err {
        EngineError::RunAborted { cap, sub, events, partial } => {
            assert_eq!((cap, sub, events), (2, 1, 2));
            assert_eq!(partial.subs.len(), 1);
            assert_eq!(partial.subs[0].events.len(), 2);
        }
        other => panic!("{other}"),
    }
}

#[test]
fn runs_are_deterministic() {
    let a = TextAnalyzer::default();
    let (app, (g, _), seeds) =
        (common::app("holdout/register-holdout"), common::graph("register"), common::seeds("register"));
    let x = run_scenario(&app, &g, &a, &seeds, limits(true)).unwrap();
    let y = run_scenario(&app, &g, &a, &seeds, limits(true)).unwrap();
    assert_eq!(
        scengraph::engine::write_result(&x, "t").lines().skip(2).collect::<Vec<_>>(),
        scengraph::engine::write_result(&y, "t").lines().skip(2).collect::<Vec<_>>()
    );
}

#[test]
fn scenario_mismatch_rejected() {
    let a = TextAnalyzer::default();
    let (app, (g, _), seeds) = (common::app("linear"), common::graph("login10"), common::seeds("login"));
    assert!(matches!(run_scenario(&app, &g, &a, &seeds, limits(false)), Err(EngineError::ScenarioMismatch { .. })));
}

#[test]
fn select_action_examples() {
    let a = TextAnalyzer::default();
    let (g, _) = common::graph("illustrative");
    let app = common::app("illustrative");
    let seeds = common::seeds("login");
    let engine = QueryEngine::new(&g, &a, DEFAULT_THETA);
    let gui = |id: &str| analyze_state(&app.render_screen(id).unwrap(), 0.1);
    let ctx = |labels: &[&str]| {
        let mut c = TestContext::default();
        for l in labels {
            let id = g.find(EntityKind::Cnt, l, None).unwrap();
            c.events.push(scengraph::engine::TestEvent {
                screen_id: String::new(),
                widget_id: String::new(),
                bbox: scengraph::BBox::new(0, 0, 1, 1),
                text: None,
                operation: scengraph::Operation::Click,
                parameter: None,
                probability: 1.0,
                entity: id,
                tail: false,
                seed_key: None,
            });
        }
        c
    };

    let home =
        select_action(&gui("home"), &TestContext::default(), &engine, &a, &seeds, SeedVariant::Valid).unwrap().unwrap();
    assert_eq!(home.candidate.text.as_deref(), Some("Menu"));
    assert_eq!(home.candidate.operation, scengraph::Operation::Click);

    let none = select_action(&gui("home"), &ctx(&["login button"]), &engine, &a, &seeds, SeedVariant::Valid).unwrap();
    assert!(none.is_none());

    let after_email = ctx(&["menu icon", "account login textview", "username"]);
    let pw = select_action(&gui("login"), &after_email, &engine, &a, &seeds, SeedVariant::Valid).unwrap().unwrap();
    assert_eq!(pw.candidate.text.as_deref(), Some("Password"));
    assert_eq!((pw.parameter.as_deref(), pw.seed_key.as_deref()), (Some("123456"), Some("password")));
    let blank = select_action(&gui("login"), &after_email, &engine, &a, &seeds, SeedVariant::Invalid).unwrap().unwrap();
    assert_eq!(blank.parameter.as_deref(), Some(""));
}
