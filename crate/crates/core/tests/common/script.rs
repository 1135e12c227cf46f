//! Report scripts: step sentences paired with app screens, rendered into
//! report bundles.

use std::path::Path;

use scengraph::corpus::{EnvInfo, ReportStep, TestReport};
use scengraph::sim::AppModel;
use serde::Deserialize;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Script {
    pub scenario: String,
    pub reports: Vec<ScriptReport>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScriptReport {
    pub id: String,
    /// App model path relative to the apps directory, without extension.
    pub app: String,
    #[serde(default)]
    pub device: String,
    #[serde(default)]
    pub os: String,
    pub steps: Vec<ScriptStep>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScriptStep {
    pub text: String,
    #[serde(default)]
    pub screen: Option<String>,
}

pub fn render_script(script: &Path, apps: &Path) -> Result<Vec<TestReport>, String> {
    let src = std::fs::read_to_string(script).map_err(|e| format!("{}: {e}", script.display()))?;
    let s: Script = toml::from_str(&src).map_err(|e| format!("{}: {e}", script.display()))?;
    let mut out = Vec::new();
    for r in s.reports {
        let path = apps.join(format!("{}.toml", r.app));
        let app = AppModel::load(&path).map_err(|e| e.to_string())?;
        if app.scenario != s.scenario {
            return Err(format!("{}: app {} is not a {} app", r.id, app.app_id, s.scenario));
        }
        let mut steps = Vec::new();
        for (i, st) in r.steps.into_iter().enumerate() {
            let screen = match &st.screen {
                Some(id) => Some(app.render_screen(id).ok_or_else(|| format!("{}: no screen {id:?}", r.id))?),
                None => None,
            };
            steps.push(ReportStep { index: i as u32 + 1, text: st.text, screen, source_screen: st.screen });
        }
        out.push(TestReport {
            report_id: r.id,
            app_id: app.app_id.clone(),
            scenario_id: s.scenario.clone(),
            env: EnvInfo { device: r.device, os: r.os },
            steps,
        });
    }
    Ok(out)
}
