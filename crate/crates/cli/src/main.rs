//! `scengraph` batch driver: build-kg, run, eval.
//!
//! Exit codes: 0 success, 1 tool error, 2 input error, 3 run aborted.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgMatches, CommandFactory, FromArgMatches, Parser, Subcommand};
use thiserror::Error;

use config::{FileConfig, RunConfig};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Aborted(String),
    #[error("{0}")]
    Tool(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Tool(_) => 1,
            CliError::Input(_) => 2,
            CliError::Aborted(_) => 3,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "scengraph", version, about = "Scenario-guided GUI test generation from test reports")]
#[command(after_help = "Precedence: flags, then SCENGRAPH_OUT for --out, then --config, then defaults.\n\
                        Exit codes: 0 success, 1 tool error, 2 input error, 3 run aborted.")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// TOML file with defaults for any flag below
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Report corpus directory
    #[arg(long, global = true, value_name = "DIR")]
    corpus: Option<PathBuf>,
    /// App model file; repeat for several apps
    #[arg(long, global = true, value_name = "FILE", action = clap::ArgAction::Append)]
    app: Vec<PathBuf>,
    /// Scenario id to restrict to
    #[arg(long, global = true)]
    scenario: Option<String>,
    /// Graph export (ekg.json) to run against
    #[arg(long, global = true, value_name = "FILE")]
    graph: Option<PathBuf>,
    /// Seed sample table
    #[arg(long, global = true, value_name = "FILE")]
    seeds: Option<PathBuf>,
    /// Output directory
    #[arg(long, global = true, value_name = "DIR", env = "SCENGRAPH_OUT", default_value = "out")]
    out: PathBuf,
    /// Similarity threshold
    #[arg(long, global = true, default_value_t = scengraph::DEFAULT_THETA)]
    theta: f64,
    /// Layout band tolerance as a fraction of the screen size
    #[arg(long, global = true, default_value_t = scengraph::screen::DEFAULT_MERGE_THRESHOLD)]
    merge_threshold: f64,
    /// Events per sub-scenario before the run aborts
    #[arg(long, global = true, default_value_t = scengraph::engine::DEFAULT_STEP_CAP)]
    step_cap: usize,
    /// Run the random baseline with this seed during eval
    #[arg(long, global = true)]
    baseline_seed: Option<u64>,
    /// Baseline events per app
    #[arg(long, global = true, default_value_t = 500)]
    baseline_budget: usize,
    /// Apps run concurrently
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    /// Also replay each seeded input with its invalid variant
    #[arg(long, global = true)]
    sweep_invalid: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build the event knowledge graph from a report corpus
    BuildKg,
    /// Explore apps with a built graph
    Run,
    /// Score run results against golden files
    Eval,
}

fn resolve(m: &ArgMatches, cli: &Cli) -> Result<RunConfig, CliError> {
    let file = match &cli.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    let (_, sub) = m.subcommand().expect("subcommand required");
    RunConfig::resolve(sub, file)
}

fn main() -> ExitCode {
    let matches = Cli::command().get_matches();
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    let result = resolve(&matches, &cli).and_then(|cfg| match cli.command {
        Command::BuildKg => commands::build_kg(&cfg),
        Command::Run => commands::run(&cfg),
        Command::Eval => commands::eval(&cfg),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
