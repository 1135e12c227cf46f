//! Deterministic simulated apps: declarative screens and widgets with
//! effects, credential tables, planted crashes, rendering to screenshot
//! bundles, and replayable sessions.

mod render;
mod session;

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ekg::legal_operations;
use crate::screen::{BBox, WidgetType};
use crate::text::Operation;

pub use render::{render, MIN_WIDGET_GAP, SCREEN_MARGIN};
pub use session::{format_log, parse_log, reset_and_replay, LogRecord, Outcome, ScreenState, SimEvent};

pub const APP_FORMAT: &str = "scengraph-app/1";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SimError {
    #[error("app model {app}: {message}")]
    Model { app: String, message: String },
    #[error("illegal event: {0}")]
    IllegalEvent(String),
    #[error("session already crashed on bug {0}")]
    CrashedSession(String),
    #[error("replay diverged at event {step}: {reason}")]
    ReplayDiverged { step: usize, reason: String },
    #[error("event log line {line}: {message}")]
    LogFormat { line: usize, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    /// Some row of the credential table agrees with the session on every
    /// listed field.
    Credentials {
        table: String,
        fields: Vec<String>,
    },
    /// The field was set to a non-empty value.
    Filled(String),
    Equals {
        field: String,
        value: String,
    },
    All(Vec<Condition>),
    Not(Box<Condition>),
}

impl Condition {
    fn fields(&self, out: &mut BTreeSet<String>) {
        match self {
            Condition::Credentials { fields, .. } => out.extend(fields.iter().cloned()),
            Condition::Filled(f) | Condition::Equals { field: f, .. } => {
                out.insert(f.clone());
            }
            Condition::All(cs) => cs.iter().for_each(|c| c.fields(out)),
            Condition::Not(c) => c.fields(out),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Effect {
    Transition(String),
    /// Stores the event parameter, or the widget label when the event has
    /// none.
    SetField(String),
    Crash(String),
    End,
    Noop,
    Guarded {
        when: Condition,
        then: Box<Effect>,
        #[serde(rename = "else")]
        otherwise: Box<Effect>,
    },
}

impl Effect {
    fn visit<'a>(&'a self, f: &mut impl FnMut(&'a Effect)) {
        f(self);
        if let Effect::Guarded { then, otherwise, .. } = self {
            then.visit(f);
            otherwise.visit(f);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimWidget {
    pub id: String,
    #[serde(rename = "type")]
    pub widget_type: WidgetType,
    #[serde(default)]
    pub label: String,
    pub bbox: BBox,
    #[serde(default)]
    pub actions: BTreeMap<Operation, Effect>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StaticText {
    pub text: String,
    pub bbox: BBox,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Screen {
    pub id: String,
    #[serde(default)]
    pub widgets: Vec<SimWidget>,
    #[serde(default)]
    pub texts: Vec<StaticText>,
}

impl Screen {
    pub fn widget(&self, id: &str) -> Option<&SimWidget> {
        self.widgets.iter().find(|w| w.id == id)
    }

    /// Declared widget under a pixel.
    pub fn widget_at(&self, x: u32, y: u32) -> Option<&SimWidget> {
        self.widgets.iter().find(|w| w.bbox.contains_point(x, y))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BugSpec {
    pub id: String,
    #[serde(default)]
    pub description: String,
    /// Whether the crash lies on one of the scenario's sub-scenario paths.
    #[serde(default)]
    pub on_scenario: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AppModel {
    pub format: String,
    pub app_id: String,
    pub scenario: String,
    pub initial_screen: String,
    pub width: u32,
    pub height: u32,
    #[serde(default)]
    pub credentials: BTreeMap<String, Vec<BTreeMap<String, String>>>,
    #[serde(default)]
    pub bugs: Vec<BugSpec>,
    pub screens: Vec<Screen>,
}

impl AppModel {
    pub fn from_toml(src: &str) -> Result<Self, SimError> {
        let app: AppModel = toml::from_str(src).map_err(|e| SimError::Model {
            app: "<unparsed>".into(),
            message: match e.span() {
                Some(s) => format!("line {}: {}", src[..s.start].matches('\n').count() + 1, e.message()),
                None => e.message().to_string(),
            },
        })?;
        app.validate()?;
        Ok(app)
    }

    pub fn load(path: &Path) -> Result<Self, SimError> {
        let src = std::fs::read_to_string(path)
            .map_err(|e| SimError::Model { app: path.display().to_string(), message: e.to_string() })?;
        Self::from_toml(&src).map_err(|e| match e {
            SimError::Model { message, .. } => SimError::Model { app: path.display().to_string(), message },
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("app model serializes")
    }

    pub fn screen(&self, id: &str) -> Option<&Screen> {
        self.screens.iter().find(|s| s.id == id)
    }

    fn err(&self, message: String) -> SimError {
        SimError::Model { app: self.app_id.clone(), message }
    }

    /// Structural checks plus the geometric rules that keep rendered
    /// widgets recoverable by screen analysis.
    pub fn validate(&self) -> Result<(), SimError> {
        if self.format != APP_FORMAT {
            return Err(self.err(format!("unsupported format {:?}", self.format)));
        }
        if self.width == 0 || self.height == 0 {
            return Err(self.err("screen dimensions must be positive".into()));
        }
        let screen_ids: BTreeSet<&str> = self.screens.iter().map(|s| s.id.as_str()).collect();
        if screen_ids.len() != self.screens.len() {
            return Err(self.err("duplicate screen id".into()));
        }
        if self.screen(&self.initial_screen).is_none() {
            return Err(self.err(format!("initial screen {:?} does not exist", self.initial_screen)));
        }
        let plain = |id: &str| !id.is_empty() && id.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_');
        let ids =
            self.screens.iter().map(|s| &s.id).chain(self.screens.iter().flat_map(|s| s.widgets.iter().map(|w| &w.id)));
        if let Some(bad) = ids.chain(self.bugs.iter().map(|b| &b.id)).find(|id| !plain(id)) {
            return Err(self.err(format!("id {bad:?} must be ASCII letters, digits, '-' or '_'")));
        }
        let bug_ids: BTreeSet<&str> = self.bugs.iter().map(|b| b.id.as_str()).collect();
        let mut settable = BTreeSet::new();
        let mut guarded = BTreeSet::new();
        let side_cap = (render::small_square_cap(self.width, self.height)) as u32;
        for s in &self.screens {
            let mut ids = BTreeSet::new();
            for (i, w) in s.widgets.iter().enumerate() {
                let at = |m: &str| self.err(format!("screen {:?} widget {:?}: {m}", s.id, w.id));
                if !ids.insert(w.id.as_str()) {
                    return Err(at("duplicate widget id"));
                }
                let b = w.bbox;
                if b.is_empty()
                    || b.x0 < SCREEN_MARGIN
                    || b.y0 < SCREEN_MARGIN
                    || b.x1 + SCREEN_MARGIN > self.width
                    || b.y1 + SCREEN_MARGIN > self.height
                {
                    return Err(at(&format!("bbox {b} must keep {SCREEN_MARGIN}px inside the screen")));
                }
                for other in &s.widgets[..i] {
                    if b.gap(&other.bbox) < MIN_WIDGET_GAP {
                        return Err(at(&format!("closer than {MIN_WIDGET_GAP}px to {:?}", other.id)));
                    }
                }
                let square = b.width().abs_diff(b.height()) <= 1 && b.width().max(b.height()) <= side_cap;
                match w.widget_type {
                    WidgetType::Icon | WidgetType::Checkbox if !square || b.width() < 4 || b.height() < 4 => {
                        return Err(at(&format!("icons and checkboxes are squares of side 4..={side_cap}")));
                    }
                    WidgetType::Button | WidgetType::TextField | WidgetType::TextView | WidgetType::ImageView
                        if square =>
                    {
                        return Err(at("only icons and checkboxes may be small squares"));
                    }
                    WidgetType::Button if b.width() as f64 / b.height() as f64 > 3.0 => {
                        return Err(at("buttons need an aspect ratio of at most 3"));
                    }
                    WidgetType::TextField if b.width() as f64 / b.height() as f64 <= 3.0 => {
                        return Err(at("text fields need an aspect ratio above 3"));
                    }
                    WidgetType::Unknown => return Err(at("widgets must declare a concrete type")),
                    _ => {}
                }
                if (b.width() < 3 || b.height() < 3) || b.area() < crate::screen::MIN_WIDGET_AREA {
                    return Err(at("too small to detect"));
                }
                match (w.widget_type, w.label.trim().is_empty()) {
                    (WidgetType::ImageView, false) => return Err(at("image views carry no label")),
                    (WidgetType::ImageView, true) => {}
                    (_, true) => return Err(at("label required")),
                    _ => {}
                }
                for (op, eff) in &w.actions {
                    if !legal_operations(w.widget_type).contains(op) {
                        return Err(at(&format!("{op} is not legal on a {}", w.widget_type)));
                    }
                    let mut bad = None;
                    eff.visit(&mut |e| match e {
                        Effect::Transition(t) if !screen_ids.contains(t.as_str()) => {
                            bad = Some(format!("transition to unknown screen {t:?}"))
                        }
                        Effect::Crash(b) if !bug_ids.contains(b.as_str()) => {
                            bad = Some(format!("undeclared bug {b:?}"))
                        }
                        Effect::SetField(f) => {
                            settable.insert(f.clone());
                        }
                        Effect::Guarded { when, .. } => when.fields(&mut guarded),
                        _ => {}
                    });
                    if let Some(m) = bad {
                        return Err(at(&m));
                    }
                }
            }
            for t in &s.texts {
                if !t.bbox.fits_within(self.width, self.height) {
                    return Err(self.err(format!("screen {:?}: text {:?} outside the screen", s.id, t.text)));
                }
                if s.widgets.iter().any(|w| w.bbox.intersection(&t.bbox).is_some()) {
                    return Err(self.err(format!("screen {:?}: static text {:?} overlaps a widget", s.id, t.text)));
                }
            }
        }
        if let Some(f) = guarded.difference(&settable).next() {
            return Err(self.err(format!("guard reads field {f:?} that no widget sets")));
        }
        Ok(())
    }

    pub fn bug(&self, id: &str) -> Option<&BugSpec> {
        self.bugs.iter().find(|b| b.id == id)
    }
}
