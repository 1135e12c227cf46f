//! Test-report bundles: one directory per report holding `report.toml`, and
//! per step an optional PGM screenshot plus its text layer.

mod textlayer;

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::screen::{read_pgm, write_pgm, BBox, ScreenRaster, TextItem};

pub use textlayer::{parse_text_layer, write_text_layer};

pub const REPORT_FORMAT: &str = "scengraph-report/1";
pub const MANIFEST: &str = "report.toml";

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}{}: {message}", path.display(), line.map(|l| format!(":{l}")).unwrap_or_default())]
    CorpusFormat { path: PathBuf, line: Option<usize>, message: String },
    #[error("report {report_id}: {message}")]
    ReportShape { report_id: String, message: String },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CorpusError + '_ {
    move |source| CorpusError::Io { path: path.to_path_buf(), source }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct EnvInfo {
    #[serde(default)]
    pub device: String,
    #[serde(default)]
    pub os: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScreenBundle {
    pub raster: ScreenRaster,
    pub text_layer: Vec<TextItem>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReportStep {
    pub index: u32,
    pub text: String,
    /// `None` when the report has no screenshot for this step.
    pub screen: Option<ScreenBundle>,
    /// Screen id of the app model the screenshot was rendered from, when known.
    pub source_screen: Option<String>,
}

impl ReportStep {
    pub fn screen_absent(&self) -> bool {
        self.screen.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TestReport {
    pub report_id: String,
    pub app_id: String,
    pub scenario_id: String,
    pub env: EnvInfo,
    pub steps: Vec<ReportStep>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Warning {
    ScreenAbsent { step: u32 },
    TextOutOfBounds { step: u32, text: String, bbox: BBox },
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Warning::ScreenAbsent { step } => write!(f, "step {step}: no screenshot"),
            Warning::TextOutOfBounds { step, text, bbox } => {
                write!(f, "step {step}: text {text:?} box {bbox} exceeds the raster")
            }
        }
    }
}

pub fn validate_report(report: &TestReport) -> Vec<Warning> {
    let mut out = Vec::new();
    for step in &report.steps {
        match &step.screen {
            None => out.push(Warning::ScreenAbsent { step: step.index }),
            Some(b) => {
                for t in &b.text_layer {
                    if !t.bbox.fits_within(b.raster.width(), b.raster.height()) {
                        out.push(Warning::TextOutOfBounds { step: step.index, text: t.text.clone(), bbox: t.bbox });
                    }
                }
            }
        }
    }
    out
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ManifestStep {
    index: u32,
    text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    raster: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    text_layer: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    source_screen: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Manifest {
    format: String,
    report_id: String,
    app_id: String,
    scenario: String,
    #[serde(default)]
    env: EnvInfo,
    #[serde(default)]
    steps: Vec<ManifestStep>,
}

fn line_of(src: &str, offset: usize) -> usize {
    src[..offset.min(src.len())].matches('\n').count() + 1
}

fn check_shape(report: &TestReport) -> Result<(), CorpusError> {
    let shape = |message: String| CorpusError::ReportShape { report_id: report.report_id.clone(), message };
    if report.scenario_id.trim().is_empty() {
        return Err(shape("empty scenario".into()));
    }
    for (i, step) in report.steps.iter().enumerate() {
        let expected = i as u32 + 1;
        if step.index != expected {
            return Err(shape(format!("step index {} where {expected} was expected", step.index)));
        }
        if step.text.trim().is_empty() {
            return Err(shape(format!("step {expected} has an empty sentence")));
        }
    }
    Ok(())
}

/// Loads one report directory.
pub fn load_report(dir: &Path) -> Result<TestReport, CorpusError> {
    let mpath = dir.join(MANIFEST);
    let src = fs::read_to_string(&mpath).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => {
            CorpusError::CorpusFormat { path: mpath.clone(), line: None, message: "missing manifest".into() }
        }
        _ => CorpusError::Io { path: mpath.clone(), source: e },
    })?;
    let m: Manifest = toml::from_str(&src).map_err(|e| CorpusError::CorpusFormat {
        path: mpath.clone(),
        line: e.span().map(|s| line_of(&src, s.start)),
        message: e.message().to_string(),
    })?;
    if m.format != REPORT_FORMAT {
        return Err(CorpusError::CorpusFormat {
            path: mpath,
            line: None,
            message: format!("unsupported format {:?}", m.format),
        });
    }
    let mut steps = Vec::with_capacity(m.steps.len());
    for s in m.steps {
        let screen = match (&s.raster, &s.text_layer) {
            (None, None) => None,
            (Some(r), t) => {
                let rpath = dir.join(r);
                let rsrc = fs::read_to_string(&rpath).map_err(io_err(&rpath))?;
                let raster = read_pgm(&rsrc).map_err(|e| CorpusError::CorpusFormat {
                    path: rpath.clone(),
                    line: None,
                    message: e.to_string(),
                })?;
                let text_layer = match t {
                    None => Vec::new(),
                    Some(t) => {
                        let tpath = dir.join(t);
                        let tsrc = fs::read_to_string(&tpath).map_err(io_err(&tpath))?;
                        parse_text_layer(&tsrc).map_err(|(line, message)| CorpusError::CorpusFormat {
                            path: tpath.clone(),
                            line: Some(line),
                            message,
                        })?
                    }
                };
                Some(ScreenBundle { raster, text_layer })
            }
            (None, Some(_)) => {
                return Err(CorpusError::CorpusFormat {
                    path: mpath,
                    line: None,
                    message: format!("step {} has a text layer but no raster", s.index),
                })
            }
        };
        steps.push(ReportStep { index: s.index, text: s.text, screen, source_screen: s.source_screen });
    }
    let report = TestReport { report_id: m.report_id, app_id: m.app_id, scenario_id: m.scenario, env: m.env, steps };
    check_shape(&report)?;
    Ok(report)
}

/// Every report directory under `path`, sorted by `(scenario_id,
/// report_id)`. Each subdirectory must hold a manifest; plain files at the
/// top level are ignored.
pub fn load_corpus(path: &Path) -> Result<Vec<TestReport>, CorpusError> {
    let mut dirs = Vec::new();
    for entry in fs::read_dir(path).map_err(io_err(path))? {
        let entry = entry.map_err(io_err(path))?;
        let p = entry.path();
        let hidden = entry.file_name().to_string_lossy().starts_with('.');
        if p.is_dir() && !hidden {
            dirs.push(p);
        }
    }
    dirs.sort();
    let mut reports = dirs.iter().map(|d| load_report(d)).collect::<Result<Vec<_>, _>>()?;
    reports.sort_by(|a, b| (&a.scenario_id, &a.report_id).cmp(&(&b.scenario_id, &b.report_id)));
    Ok(reports)
}

/// Writes one `<report_id>/` directory per report. Existing files with the
/// same names are overwritten.
pub fn save_corpus(path: &Path, reports: &[TestReport]) -> Result<(), CorpusError> {
    for r in reports {
        check_shape(r)?;
        let dir = path.join(&r.report_id);
        fs::create_dir_all(&dir).map_err(io_err(&dir))?;
        let mut steps = Vec::new();
        for s in &r.steps {
            let (raster, text_layer) = match &s.screen {
                None => (None, None),
                Some(b) => {
                    let rname = format!("step-{:02}.pgm", s.index);
                    let tname = format!("step-{:02}.txt", s.index);
                    let rp = dir.join(&rname);
                    fs::write(&rp, write_pgm(&b.raster)).map_err(io_err(&rp))?;
                    let tp = dir.join(&tname);
                    fs::write(&tp, write_text_layer(&b.text_layer)).map_err(io_err(&tp))?;
                    (Some(rname), Some(tname))
                }
            };
            steps.push(ManifestStep {
                index: s.index,
                text: s.text.clone(),
                raster,
                text_layer,
                source_screen: s.source_screen.clone(),
            });
        }
        let m = Manifest {
            format: REPORT_FORMAT.into(),
            report_id: r.report_id.clone(),
            app_id: r.app_id.clone(),
            scenario: r.scenario_id.clone(),
            env: r.env.clone(),
            steps,
        };
        let mp = dir.join(MANIFEST);
        let body = toml::to_string(&m).expect("manifest serializes");
        fs::write(&mp, body).map_err(io_err(&mp))?;
    }
    Ok(())
}
