//! Flag, config-file and default resolution.

use std::path::{Path, PathBuf};

use clap::parser::ValueSource;
use clap::ArgMatches;
use serde::Deserialize;

use crate::CliError;

/// Optional TOML config; keys mirror the long flags with underscores.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub corpus: Option<PathBuf>,
    #[serde(default)]
    pub apps: Vec<PathBuf>,
    pub scenario: Option<String>,
    pub graph: Option<PathBuf>,
    pub seeds: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub theta: Option<f64>,
    pub merge_threshold: Option<f64>,
    pub step_cap: Option<usize>,
    pub baseline_seed: Option<u64>,
    pub baseline_budget: Option<usize>,
    pub jobs: Option<usize>,
    pub sweep_invalid: Option<bool>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let src = std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        let mut c: FileConfig = toml::from_str(&src).map_err(|e| {
            let line = e.span().map(|s| src[..s.start].matches('\n').count() + 1);
            let at = line.map(|l| format!(":{l}")).unwrap_or_default();
            CliError::Input(format!("{}{at}: {}", path.display(), e.message()))
        })?;
        // paths in the file are relative to the file
        let base = path.parent().unwrap_or(Path::new("."));
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        for p in [&mut c.corpus, &mut c.graph, &mut c.seeds, &mut c.out].into_iter().flatten() {
            fix(p);
        }
        c.apps.iter_mut().for_each(fix);
        Ok(c)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub corpus: Option<PathBuf>,
    pub apps: Vec<PathBuf>,
    pub scenario: Option<String>,
    pub graph: Option<PathBuf>,
    pub seeds: Option<PathBuf>,
    pub out: PathBuf,
    pub theta: f64,
    pub merge_threshold: f64,
    pub step_cap: usize,
    pub baseline_seed: Option<u64>,
    pub baseline_budget: usize,
    pub jobs: usize,
    pub sweep_invalid: bool,
}

fn explicit(m: &ArgMatches, id: &str) -> bool {
    matches!(m.value_source(id), Some(ValueSource::CommandLine | ValueSource::EnvVariable))
}

/// Flag or env value when set explicitly, else the file value, else the
/// flag default.
fn pick<T: Clone + Send + Sync + 'static>(m: &ArgMatches, id: &str, file: Option<T>) -> Option<T> {
    if explicit(m, id) {
        return m.get_one::<T>(id).cloned();
    }
    file.or_else(|| m.get_one::<T>(id).cloned())
}

impl RunConfig {
    pub fn resolve(m: &ArgMatches, file: FileConfig) -> Result<Self, CliError> {
        let apps: Vec<PathBuf> = if explicit(m, "app") {
            m.get_many::<PathBuf>("app").into_iter().flatten().cloned().collect()
        } else {
            file.apps
        };
        let c = RunConfig {
            corpus: pick(m, "corpus", file.corpus),
            apps,
            scenario: pick(m, "scenario", file.scenario),
            graph: pick(m, "graph", file.graph),
            seeds: pick(m, "seeds", file.seeds),
            out: pick(m, "out", file.out).expect("out has a default"),
            theta: pick(m, "theta", file.theta).expect("theta has a default"),
            merge_threshold: pick(m, "merge_threshold", file.merge_threshold).expect("default"),
            step_cap: pick(m, "step_cap", file.step_cap).expect("default"),
            baseline_seed: pick(m, "baseline_seed", file.baseline_seed),
            baseline_budget: pick(m, "baseline_budget", file.baseline_budget).expect("default"),
            jobs: pick(m, "jobs", file.jobs).expect("default"),
            sweep_invalid: m.get_flag("sweep_invalid") || file.sweep_invalid.unwrap_or(false),
        };
        c.check_ranges()?;
        Ok(c)
    }

    fn check_ranges(&self) -> Result<(), CliError> {
        let bad = |what: &str, v: String, range: &str| Err(CliError::Input(format!("{what} {v} outside {range}")));
        if !(self.theta > 0.0 && self.theta <= 1.0) {
            return bad("theta", self.theta.to_string(), "(0, 1]");
        }
        if !(0.0..0.5).contains(&self.merge_threshold) {
            return bad("merge threshold", self.merge_threshold.to_string(), "[0, 0.5)");
        }
        if self.step_cap == 0 {
            return bad("step cap", "0".into(), "1..");
        }
        if self.baseline_budget == 0 {
            return bad("baseline budget", "0".into(), "1..");
        }
        if self.jobs == 0 {
            return bad("jobs", "0".into(), "1..");
        }
        Ok(())
    }

    pub fn require<'a, T>(value: &'a Option<T>, flag: &str) -> Result<&'a T, CliError> {
        value.as_ref().ok_or_else(|| CliError::Input(format!("--{flag} is required")))
    }
}

/// Fails unless the path exists; used before any work starts.
pub fn existing(p: &Path, what: &str) -> Result<(), CliError> {
    if p.exists() {
        Ok(())
    } else {
        Err(CliError::Input(format!("{what} {} not found", p.display())))
    }
}
