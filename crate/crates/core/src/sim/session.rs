use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::text::Operation;

use super::{AppModel, Condition, Effect, SimError};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SimEvent {
    pub widget_id: String,
    pub operation: Operation,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parameter: Option<String>,
}

impl SimEvent {
    pub fn new(widget_id: &str, operation: Operation, parameter: Option<&str>) -> Self {
        SimEvent { widget_id: widget_id.into(), operation, parameter: parameter.map(Into::into) }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum Outcome {
    Moved(String),
    Set(String),
    Crash(String),
    End,
    Noop,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outcome::Moved(s) => write!(f, "moved:{s}"),
            Outcome::Set(s) => write!(f, "set:{s}"),
            Outcome::Crash(s) => write!(f, "crash:{s}"),
            Outcome::End => f.write_str("end"),
            Outcome::Noop => f.write_str("noop"),
        }
    }
}

impl From<Outcome> for String {
    fn from(o: Outcome) -> String {
        o.to_string()
    }
}

impl TryFrom<String> for Outcome {
    type Error = String;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        Ok(match s.split_once(':') {
            Some(("moved", x)) => Outcome::Moved(x.into()),
            Some(("set", x)) => Outcome::Set(x.into()),
            Some(("crash", x)) => Outcome::Crash(x.into()),
            None if s == "end" => Outcome::End,
            None if s == "noop" => Outcome::Noop,
            _ => return Err(format!("unknown outcome {s:?}")),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogRecord {
    pub step: usize,
    pub screen_id: String,
    pub widget_id: String,
    pub operation: Operation,
    pub parameter: Option<String>,
    pub outcome: Outcome,
}

impl LogRecord {
    pub fn event(&self) -> SimEvent {
        SimEvent { widget_id: self.widget_id.clone(), operation: self.operation, parameter: self.parameter.clone() }
    }
}

pub const LOG_HEADER: &str = "step,screen_id,widget_id,operation,parameter,outcome";

/// One record per line after a header. The parameter is `-` when absent
/// and a JSON string otherwise, so empty and comma-bearing inputs survive.
pub fn format_log(records: &[LogRecord]) -> String {
    let mut s = String::from(LOG_HEADER);
    s.push('\n');
    for r in records {
        let p = match &r.parameter {
            None => "-".to_string(),
            Some(p) => serde_json::to_string(p).expect("string serializes"),
        };
        s.push_str(&format!("{},{},{},{},{p},{}\n", r.step, r.screen_id, r.widget_id, r.operation, r.outcome));
    }
    s
}

pub fn parse_log(src: &str) -> Result<Vec<LogRecord>, SimError> {
    let mut out = Vec::new();
    for (n, line) in src.lines().enumerate() {
        let bad = |m: &str| SimError::LogFormat { line: n + 1, message: m.to_string() };
        if line.is_empty() || (n == 0 && line == LOG_HEADER) {
            continue;
        }
        let mut head = line.splitn(5, ',');
        let (Some(step), Some(screen), Some(widget), Some(op), Some(rest)) =
            (head.next(), head.next(), head.next(), head.next(), head.next())
        else {
            return Err(bad("expected six fields"));
        };
        let (parameter, outcome) = if let Some(r) = rest.strip_prefix("-,") {
            (None, r)
        } else {
            let mut de = serde_json::Deserializer::from_str(rest).into_iter::<String>();
            let p = de.next().ok_or_else(|| bad("missing parameter"))?.map_err(|e| bad(&e.to_string()))?;
            let tail = &rest[de.byte_offset()..];
            (Some(p), tail.strip_prefix(',').ok_or_else(|| bad("missing outcome"))?)
        };
        out.push(LogRecord {
            step: step.parse().map_err(|_| bad("bad step"))?,
            screen_id: screen.into(),
            widget_id: widget.into(),
            operation: op.parse().map_err(|_| bad("bad operation"))?,
            parameter,
            outcome: Outcome::try_from(outcome.to_string()).map_err(|e| bad(&e))?,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScreenState {
    pub screen: String,
    pub fields: BTreeMap<String, String>,
    pub crashed: Option<String>,
    pub ended: bool,
    pub log: Vec<LogRecord>,
}

impl ScreenState {
    pub fn initial(app: &AppModel) -> Self {
        ScreenState {
            screen: app.initial_screen.clone(),
            fields: BTreeMap::new(),
            crashed: None,
            ended: false,
            log: Vec::new(),
        }
    }
}

impl AppModel {
    fn holds(&self, state: &ScreenState, c: &Condition) -> bool {
        match c {
            Condition::Credentials { table, fields } => self.credentials.get(table).is_some_and(|rows| {
                rows.iter().any(|row| fields.iter().all(|f| row.get(f).is_some() && row.get(f) == state.fields.get(f)))
            }),
            Condition::Filled(f) => state.fields.get(f).is_some_and(|v| !v.is_empty()),
            Condition::Equals { field, value } => state.fields.get(field) == Some(value),
            Condition::All(cs) => cs.iter().all(|c| self.holds(state, c)),
            Condition::Not(c) => !self.holds(state, c),
        }
    }

    fn resolve<'a>(&self, state: &ScreenState, e: &'a Effect) -> &'a Effect {
        match e {
            Effect::Guarded { when, then, otherwise } => {
                self.resolve(state, if self.holds(state, when) { then } else { otherwise })
            }
            other => other,
        }
    }

    /// Whether the event would be accepted in this state.
    pub fn is_legal(&self, state: &ScreenState, ev: &SimEvent) -> bool {
        self.check(state, ev).is_ok()
    }

    fn check<'s>(&'s self, state: &ScreenState, ev: &SimEvent) -> Result<&'s super::SimWidget, SimError> {
        if let Some(b) = &state.crashed {
            return Err(SimError::CrashedSession(b.clone()));
        }
        let screen = self
            .screen(&state.screen)
            .ok_or_else(|| SimError::IllegalEvent(format!("no screen {:?}", state.screen)))?;
        let w = screen
            .widget(&ev.widget_id)
            .ok_or_else(|| SimError::IllegalEvent(format!("no widget {:?} on {:?}", ev.widget_id, screen.id)))?;
        if !w.actions.contains_key(&ev.operation) {
            return Err(SimError::IllegalEvent(format!("{} not supported by {:?}", ev.operation, w.id)));
        }
        if ev.operation.takes_parameter() != ev.parameter.is_some() {
            return Err(SimError::IllegalEvent(format!("{} parameter arity mismatch on {:?}", ev.operation, w.id)));
        }
        Ok(w)
    }

    /// Applies one event and returns the successor state.
    pub fn execute_event(&self, state: &ScreenState, ev: &SimEvent) -> Result<ScreenState, SimError> {
        let w = self.check(state, ev)?;
        let mut next = state.clone();
        let outcome = match self.resolve(state, &w.actions[&ev.operation]) {
            Effect::Transition(t) => {
                next.screen = t.clone();
                Outcome::Moved(t.clone())
            }
            Effect::SetField(f) => {
                let v = ev.parameter.clone().unwrap_or_else(|| w.label.clone());
                next.fields.insert(f.clone(), v);
                Outcome::Set(f.clone())
            }
            Effect::Crash(b) => {
                next.crashed = Some(b.clone());
                Outcome::Crash(b.clone())
            }
            Effect::End => {
                next.ended = true;
                Outcome::End
            }
            Effect::Noop => Outcome::Noop,
            Effect::Guarded { .. } => unreachable!("guards are resolved"),
        };
        next.log.push(LogRecord {
            step: state.log.len() + 1,
            screen_id: state.screen.clone(),
            widget_id: w.id.clone(),
            operation: ev.operation,
            parameter: ev.parameter.clone(),
            outcome,
        });
        Ok(next)
    }

    pub fn render_screen(&self, id: &str) -> Option<crate::corpus::ScreenBundle> {
        self.screen(id).map(|s| super::render(s, self.width, self.height))
    }
}

/// Fresh session advanced through `prefix`. Any illegal event or crash along
/// the way is a divergence.
pub fn reset_and_replay(app: &AppModel, prefix: &[SimEvent]) -> Result<ScreenState, SimError> {
    let mut state = ScreenState::initial(app);
    for (i, ev) in prefix.iter().enumerate() {
        state = app
            .execute_event(&state, ev)
            .map_err(|e| SimError::ReplayDiverged { step: i + 1, reason: e.to_string() })?;
        if let Some(b) = &state.crashed {
            return Err(SimError::ReplayDiverged { step: i + 1, reason: format!("crashed on bug {b}") });
        }
    }
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::super::tests::LOGIN_APP;
    use super::*;
    use proptest::prelude::*;

    fn app() -> AppModel {
        AppModel::from_toml(LOGIN_APP).unwrap()
    }

    fn run(app: &AppModel, evs: &[SimEvent]) -> Result<ScreenState, SimError> {
        evs.iter().try_fold(ScreenState::initial(app), |s, e| app.execute_event(&s, e))
    }

    #[test]
    fn login_paths() {
        let a = app();
        let good = [
            SimEvent::new("user", Operation::Input, Some("admin")),
            SimEvent::new("pass", Operation::Input, Some("123456")),
            SimEvent::new("go", Operation::Click, None),
        ];
        assert_eq!(run(&a, &good).unwrap().screen, "home");
        let mut wrong = good.clone();
        wrong[1].parameter = Some("nope".into());
        let s = run(&a, &wrong).unwrap();
        assert_eq!((s.screen.as_str(), s.crashed.as_deref()), ("error", None));
        let mut blank = good.clone();
        blank[0].parameter = Some(String::new());
        let s = run(&a, &blank).unwrap();
        assert_eq!(s.crashed.as_deref(), Some("null-user"));
        assert!(matches!(a.execute_event(&s, &good[2]), Err(SimError::CrashedSession(_))));
    }

    #[test]
    fn illegal_events() {
        let a = app();
        let s = ScreenState::initial(&a);
        for ev in [
            SimEvent::new("user", Operation::Check, None),
            SimEvent::new("user", Operation::Input, None),
            SimEvent::new("go", Operation::Click, Some("x")),
            SimEvent::new("ghost", Operation::Click, None),
        ] {
            assert!(matches!(a.execute_event(&s, &ev), Err(SimError::IllegalEvent(_))), "{ev:?}");
        }
    }

    #[test]
    fn replay() {
        let a = app();
        assert_eq!(reset_and_replay(&a, &[]).unwrap(), ScreenState::initial(&a));
        let evs = [
            SimEvent::new("user", Operation::Input, Some("admin")),
            SimEvent::new("pass", Operation::Input, Some("x")),
            SimEvent::new("go", Operation::Click, None),
        ];
        assert_eq!(reset_and_replay(&a, &evs).unwrap(), run(&a, &evs).unwrap());
        let crash = [SimEvent::new("go", Operation::Click, None)];
        assert!(matches!(reset_and_replay(&a, &crash), Err(SimError::ReplayDiverged { step: 1, .. })));
        let stale = [SimEvent::new("back", Operation::Click, None)];
        assert!(matches!(reset_and_replay(&a, &stale), Err(SimError::ReplayDiverged { .. })));
    }

    #[test]
    fn log_roundtrip_examples() {
        let a = app();
        let s = run(
            &a,
            &[
                SimEvent::new("user", Operation::Input, Some("a,\"b\"")),
                SimEvent::new("pass", Operation::Input, Some("")),
                SimEvent::new("go", Operation::Click, None),
                SimEvent::new("back", Operation::Click, None),
            ],
        )
        .unwrap();
        let text = format_log(&s.log);
        assert!(text.starts_with(LOG_HEADER));
        assert!(text.contains("3,login,go,click,-,moved:error\n"));
        assert_eq!(parse_log(&text).unwrap(), s.log);
    }

    proptest! {
        #[test]
        fn deterministic_sessions(picks in prop::collection::vec((0usize..4, "[a-z0-9]{0,4}"), 0..12)) {
            let a = app();
            let ids = ["user", "pass", "go", "back"];
            let evs: Vec<SimEvent> = picks
                .iter()
                .map(|(i, p)| match ids[*i] {
                    w @ ("user" | "pass") => SimEvent::new(w, Operation::Input, Some(p)),
                    w => SimEvent::new(w, Operation::Click, None),
                })
                .collect();
            let mut s1 = ScreenState::initial(&a);
            let mut s2 = ScreenState::initial(&a);
            for e in &evs {
                let (r1, r2) = (a.execute_event(&s1, e), a.execute_event(&s2, e));
                prop_assert_eq!(&r1, &r2);
                if let (Ok(n1), Ok(n2)) = (r1, r2) { s1 = n1; s2 = n2; }
                if s1.crashed.is_some() {
                    prop_assert!(matches!(a.execute_event(&s1, e), Err(SimError::CrashedSession(_))));
                }
            }
            prop_assert_eq!(parse_log(&format_log(&s1.log)).unwrap(), s1.log.clone());
        }
    }
}
