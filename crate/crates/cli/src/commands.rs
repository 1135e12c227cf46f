use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use scengraph::ekg::{construct_with_log, export_graph, import_json, BuildOptions};
use scengraph::engine::{read_result, run_scenario, write_result, EngineError, RunLimits, ScenarioRunResult, Seeds};
use scengraph::eval::{evaluate_app, random_baseline, GoldenSet, MetricReport, RandomPool};
use scengraph::sim::{format_log, AppModel};
use scengraph::{load_corpus, Ekg, TextAnalyzer};

use crate::config::{existing, RunConfig};
use crate::CliError;

fn timestamp() -> String {
    chrono::Utc::now().format("%Y-%m-%dT%H:%M:%SZ").to_string()
}

fn write(path: &Path, body: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| CliError::Tool(format!("{}: {e}", dir.display())))?;
    }
    fs::write(path, body).map_err(|e| CliError::Tool(format!("{}: {e}", path.display())))
}

fn load_apps(cfg: &RunConfig) -> Result<Vec<(PathBuf, AppModel)>, CliError> {
    if cfg.apps.is_empty() {
        return Err(CliError::Input("at least one --app is required".into()));
    }
    let mut apps = Vec::new();
    for p in &cfg.apps {
        existing(p, "app model")?;
        let app = AppModel::load(p).map_err(|e| CliError::Input(e.to_string()))?;
        if cfg.scenario.as_ref().is_some_and(|s| *s != app.scenario) {
            continue;
        }
        if apps.iter().any(|(_, a): &(PathBuf, AppModel)| a.app_id == app.app_id) {
            return Err(CliError::Input(format!("{}: duplicate app id {:?}", p.display(), app.app_id)));
        }
        apps.push((p.clone(), app));
    }
    if apps.is_empty() {
        return Err(CliError::Input(format!("no app belongs to scenario {:?}", cfg.scenario.as_deref().unwrap_or(""))));
    }
    Ok(apps)
}

fn app_dir(out: &Path, app_id: &str) -> PathBuf {
    out.join("runs").join(app_id)
}

pub fn build_kg(cfg: &RunConfig) -> Result<(), CliError> {
    let corpus = RunConfig::require(&cfg.corpus, "corpus")?;
    existing(corpus, "corpus")?;
    let mut reports = load_corpus(corpus).map_err(|e| CliError::Input(e.to_string()))?;
    if let Some(s) = &cfg.scenario {
        reports.retain(|r| r.scenario_id == *s);
    }
    let opts = BuildOptions { theta: cfg.theta, merge_threshold: cfg.merge_threshold, ..BuildOptions::default() };
    let (mut g, log) = construct_with_log(&reports, &opts).map_err(|e| CliError::Input(e.to_string()))?;
    if g.scenario_id.is_empty() {
        g.scenario_id = cfg.scenario.clone().unwrap_or_default();
    }
    let table = g.counts().table();
    let mut body = format!("# generated {}\n", timestamp());
    let _ = writeln!(body, "scenario {:?}, {} reports", g.scenario_id, reports.len());
    body.push_str(&table);
    for l in &log.lines {
        body.push_str(l);
        body.push('\n');
    }
    let json = export_graph(&g, "json").map_err(|e| CliError::Tool(e.to_string()))?;
    let dot = export_graph(&g, "dot").map_err(|e| CliError::Tool(e.to_string()))?;
    write(&cfg.out.join("ekg.json"), &json)?;
    write(&cfg.out.join("ekg.dot"), &dot)?;
    write(&cfg.out.join("build.log"), &body)?;
    print!("{table}");
    println!("graph written to {}", cfg.out.join("ekg.json").display());
    Ok(())
}

fn load_graph(p: &Path) -> Result<Ekg, CliError> {
    existing(p, "graph")?;
    let src = fs::read_to_string(p).map_err(|e| CliError::Input(format!("{}: {e}", p.display())))?;
    import_json(&src).map_err(|e| CliError::Input(format!("{}: {e}", p.display())))
}

fn write_run(out: &Path, r: &ScenarioRunResult, stamp: &str) -> Result<(), CliError> {
    let dir = app_dir(out, &r.app_id);
    if dir.exists() {
        fs::remove_dir_all(&dir).map_err(|e| CliError::Tool(format!("{}: {e}", dir.display())))?;
    }
    write(&dir.join("result.json"), &write_result(r, stamp))?;
    for s in &r.subs {
        write(&dir.join(format!("run-{:02}.log", s.index)), &format_log(&s.log))?;
    }
    for (i, s) in r.sweeps.iter().enumerate() {
        write(&dir.join(format!("sweep-{:02}.log", i + 1)), &format_log(&s.run.log))?;
    }
    Ok(())
}

pub fn run(cfg: &RunConfig) -> Result<(), CliError> {
    let graph = load_graph(RunConfig::require(&cfg.graph, "graph")?)?;
    let seeds_path = RunConfig::require(&cfg.seeds, "seeds")?;
    existing(seeds_path, "seeds")?;
    let seeds = Seeds::load(seeds_path).map_err(|e| CliError::Input(e.to_string()))?;
    let apps = load_apps(cfg)?;
    for (p, a) in &apps {
        if a.scenario != graph.scenario_id {
            return Err(CliError::Input(format!(
                "{}: app scenario {:?} does not match graph scenario {:?}",
                p.display(),
                a.scenario,
                graph.scenario_id
            )));
        }
    }
    let analyzer = TextAnalyzer::default();
    let limits = RunLimits {
        theta: cfg.theta,
        merge_threshold: cfg.merge_threshold,
        step_cap: cfg.step_cap,
        sweep_invalid: cfg.sweep_invalid,
    };
    let pool =
        rayon::ThreadPoolBuilder::new().num_threads(cfg.jobs).build().map_err(|e| CliError::Tool(e.to_string()))?;
    let results: Vec<Result<ScenarioRunResult, EngineError>> =
        pool.install(|| apps.par_iter().map(|(_, a)| run_scenario(a, &graph, &analyzer, &seeds, limits)).collect());
    let stamp = timestamp();
    let mut aborted = None;
    for ((_, app), r) in apps.iter().zip(results) {
        match r {
            Ok(r) => {
                let [c1, c2, c3] = r.case_counts();
                let crashes: Vec<&str> = r.crashes.iter().map(String::as_str).collect();
                println!(
                    "{}: {} sub-scenarios (case1 {c1}, case2 {c2}, case3 {c3}), {} sweeps, crashes [{}]",
                    r.app_id,
                    r.subs.len(),
                    r.sweeps.len(),
                    crashes.join(", ")
                );
                write_run(&cfg.out, &r, &stamp)?;
            }
            Err(EngineError::RunAborted { cap, sub, events, partial }) => {
                write_run(&cfg.out, &partial, &stamp)?;
                let msg =
                    format!("{}: run aborted in sub-scenario {sub} after {events} events (step cap {cap})", app.app_id);
                eprintln!("{msg}");
                aborted.get_or_insert(msg);
            }
            Err(e @ (EngineError::SeedMissing { .. } | EngineError::ScenarioMismatch { .. })) => {
                return Err(CliError::Input(format!("{}: {e}", app.app_id)));
            }
            Err(e) => return Err(CliError::Tool(format!("{}: {e}", app.app_id))),
        }
    }
    match aborted {
        Some(msg) => Err(CliError::Aborted(msg)),
        None => Ok(()),
    }
}

/// `<stem>.golden.toml` beside the app model.
fn golden_path(app: &Path) -> PathBuf {
    let stem = app.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    app.with_file_name(format!("{stem}.golden.toml"))
}

pub fn eval(cfg: &RunConfig) -> Result<(), CliError> {
    let apps = load_apps(cfg)?;
    let mut inputs = Vec::new();
    for (p, app) in &apps {
        let gp = golden_path(p);
        existing(&gp, "golden file")?;
        let golden = GoldenSet::load(&gp).map_err(|e| CliError::Input(e.to_string()))?;
        let rp = app_dir(&cfg.out, &app.app_id).join("result.json");
        existing(&rp, "run result")?;
        let src = fs::read_to_string(&rp).map_err(|e| CliError::Input(format!("{}: {e}", rp.display())))?;
        let run = read_result(&src).map_err(|e| CliError::Input(format!("{}: {e}", rp.display())))?;
        inputs.push((app, golden, run));
    }
    let pool = RandomPool::default();
    let mut metrics = Vec::new();
    for (app, golden, run) in &inputs {
        let baseline = cfg.baseline_seed.map(|s| random_baseline(app, cfg.baseline_budget, s, &pool));
        let m = evaluate_app(app, golden, run, baseline.as_ref().map(|b| (b, cfg.baseline_budget)))
            .map_err(|e| CliError::Input(format!("{}: {e}", app.app_id)))?;
        println!(
            "{}: GenRate {}/{} = {:.2}%, ScenCov {}/{} = {:.2}%",
            m.app_id,
            m.gen_rate.num,
            m.gen_rate.den,
            m.gen_rate.percent,
            m.scen_cov.num,
            m.scen_cov.den,
            m.scen_cov.percent
        );
        metrics.push(m);
    }
    let report = MetricReport::new(metrics);
    let dir = cfg.out.join("eval");
    report.write_dir(&dir, &timestamp()).map_err(|e| CliError::Tool(e.to_string()))?;
    println!("metrics written to {}", dir.display());
    Ok(())
}
