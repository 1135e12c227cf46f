#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn scengraph(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_scengraph")).args(args).env_remove("SCENGRAPH_OUT").output().expect("binary runs")
}

pub fn path(p: &Path) -> &str {
    p.to_str().expect("utf-8 path")
}

/// Graph, app and seed file for each holdout subject.
pub const SUBJECTS: [(&str, &str, &str); 4] = [
    ("login10", "holdout/login-holdout", "login"),
    ("register", "holdout/register-holdout", "register"),
    ("flight", "holdout/flight-holdout", "flight"),
    ("linear", "linear", "checkout"),
];

fn ok(o: Output, what: &str) -> Output {
    assert!(
        o.status.success(),
        "{what}: {}\n{}",
        String::from_utf8_lossy(&o.stdout),
        String::from_utf8_lossy(&o.stderr)
    );
    o
}

/// build-kg, run and eval over every subject into `out`.
pub fn pipeline(out: &Path, jobs: usize) {
    let fx = fixtures();
    for (corpus, app, seeds) in SUBJECTS {
        let kg = out.join("kg").join(corpus);
        ok(scengraph(&["build-kg", "--corpus", path(&fx.join("corpus").join(corpus)), "--out", path(&kg)]), "build-kg");
        ok(
            scengraph(&[
                "run",
                "--graph",
                path(&kg.join("ekg.json")),
                "--app",
                path(&fx.join("apps").join(format!("{app}.toml"))),
                "--seeds",
                path(&fx.join("seeds").join(format!("{seeds}.toml"))),
                "--out",
                path(out),
                "--sweep-invalid",
                "--jobs",
                &jobs.to_string(),
            ]),
            "run",
        );
    }
    let mut args: Vec<String> =
        vec!["eval".into(), "--out".into(), path(out).into(), "--baseline-seed".into(), "1".into()];
    for (_, app, _) in SUBJECTS {
        args.push("--app".into());
        args.push(path(&fx.join("apps").join(format!("{app}.toml"))).into());
    }
    ok(scengraph(&args.iter().map(String::as_str).collect::<Vec<_>>()), "eval");
}

/// Every file under `dir` with its timestamp header line removed.
pub fn outputs_modulo_header(dir: &Path) -> BTreeMap<String, String> {
    fn walk(root: &Path, dir: &Path, out: &mut BTreeMap<String, String>) {
        for e in std::fs::read_dir(dir).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                walk(root, &p, out);
                continue;
            }
            let body = std::fs::read_to_string(&p).unwrap();
            let mut dropped = false;
            let kept: Vec<&str> = body
                .split_inclusive('\n')
                .filter(|l| {
                    let header = l.starts_with("# generated ") || l.starts_with("  \"generated\": ");
                    let drop = header && !dropped;
                    dropped |= drop;
                    !drop
                })
                .collect();
            out.insert(p.strip_prefix(root).unwrap().display().to_string(), kept.concat());
        }
    }
    let mut out = BTreeMap::new();
    walk(dir, dir, &mut out);
    out
}
