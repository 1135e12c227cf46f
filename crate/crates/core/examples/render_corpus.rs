//! Renders a report script into a corpus directory.
//!
//! cargo run -p scengraph --example render_corpus -- SCRIPT APPS_DIR OUT_DIR

#[path = "../tests/common/script.rs"]
mod script;

use std::path::PathBuf;
use std::process::ExitCode;

fn main() -> ExitCode {
    let args: Vec<PathBuf> = std::env::args_os().skip(1).map(PathBuf::from).collect();
    let [script, apps, out] = args.as_slice() else {
        eprintln!("usage: render_corpus SCRIPT APPS_DIR OUT_DIR");
        return ExitCode::from(2);
    };
    let reports = match script::render_script(script, apps) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if out.exists() {
        std::fs::remove_dir_all(out).expect("clear output directory");
    }
    if let Err(e) = scengraph::save_corpus(out, &reports) {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    println!("{} reports -> {}", reports.len(), out.display());
    ExitCode::SUCCESS
}
