use std::collections::{BTreeSet, HashSet};
use std::time::Instant;

use crate::ekg::{Ekg, EntityId, QueryEngine, WidgetCandidate};
use crate::screen::DEFAULT_MERGE_THRESHOLD;
use crate::sim::{reset_and_replay, AppModel, LogRecord, ScreenState, SimError, SimEvent};
use crate::text::{TextAnalyzer, DEFAULT_THETA};

use super::{
    analyze_state, classify_termination, fill, EngineError, ScenarioRunResult, SeedVariant, Seeds, SubScenarioRun,
    SweepRun, Termination, TestContext, TestEvent,
};

pub const DEFAULT_STEP_CAP: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunLimits {
    pub theta: f64,
    pub merge_threshold: f64,
    /// Events per sub-scenario, replayed prefix included.
    pub step_cap: usize,
    pub sweep_invalid: bool,
}

impl Default for RunLimits {
    fn default() -> Self {
        RunLimits {
            theta: DEFAULT_THETA,
            merge_threshold: DEFAULT_MERGE_THRESHOLD,
            step_cap: DEFAULT_STEP_CAP,
            sweep_invalid: false,
        }
    }
}

/// A recorded branch point with the alternatives not yet explored.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchFrame {
    /// `None` for the launch screen.
    pub branch: Option<EntityId>,
    pub prefix: Vec<TestEvent>,
    /// Session log at the branch, for replay verification.
    pub log: Vec<LogRecord>,
    pub alternatives: Vec<WidgetCandidate>,
}

fn class_key(g: &Ekg, id: EntityId) -> EntityId {
    g.similar_class(id)[0]
}

fn class_tail(g: &Ekg, id: EntityId) -> bool {
    g.similar_class(id).into_iter().any(|m| g.entity(m).is_some_and(|e| e.tail_tag))
}

fn class_branch(g: &Ekg, id: EntityId) -> bool {
    let succ: BTreeSet<EntityId> =
        g.similar_class(id).into_iter().flat_map(|m| g.order_successors(m)).map(|s| class_key(g, s)).collect();
    succ.len() >= 2
}

struct Runner<'a> {
    app: &'a AppModel,
    engine: QueryEngine<'a>,
    analyzer: &'a TextAnalyzer,
    seeds: &'a Seeds,
    limits: RunLimits,
}

struct Drive {
    state: ScreenState,
    context: TestContext,
    forced: Option<(WidgetCandidate, SeedVariant)>,
    record_frames: bool,
}

impl Runner<'_> {
    fn event_for(
        &self,
        state: &ScreenState,
        c: &WidgetCandidate,
        variant: SeedVariant,
    ) -> Result<TestEvent, EngineError> {
        let g = self.engine.graph();
        let sel = fill(g, self.analyzer, self.seeds, c.clone(), variant, self.engine.theta())?;
        let screen = self.app.screen(&state.screen).expect("session screen exists");
        let (x, y) = c.bbox.center();
        let w = screen
            .widget_at(x, y)
            .ok_or_else(|| EngineError::WidgetUnresolved { screen: screen.id.clone(), bbox: c.bbox })?;
        Ok(TestEvent {
            screen_id: state.screen.clone(),
            widget_id: w.id.clone(),
            bbox: c.bbox,
            text: c.text.clone(),
            operation: sel.candidate.operation,
            parameter: sel.parameter,
            probability: c.probability,
            entity: c.entity,
            tail: c.tail,
            seed_key: sel.seed_key,
        })
    }

    /// Explores from `d` until a termination case; frames for unexplored
    /// alternatives are appended to `frames`.
    fn drive(
        &self,
        mut d: Drive,
        index: usize,
        frames: &mut Vec<BranchFrame>,
        partial: &ScenarioRunResult,
    ) -> Result<SubScenarioRun, EngineError> {
        let g = self.engine.graph();
        let replayed = d.context.events.len();
        let mut visited: HashSet<(String, Option<EntityId>)> = HashSet::new();
        let finish = |d: Drive, case: Termination, anomaly, crash: Option<String>, note: Option<&str>| SubScenarioRun {
            index,
            replayed,
            termination: case,
            anomaly,
            crash,
            note: note.map(Into::into),
            events: d.context.events,
            log: d.state.log,
        };
        loop {
            let last = d.context.last_entity();
            let candidates = if d.state.ended {
                Vec::new()
            } else {
                let bundle = self.app.render_screen(&d.state.screen).expect("session screen exists");
                let gui = analyze_state(&bundle, self.limits.merge_threshold);
                self.engine.query(&gui, last)
            };
            let decision = classify_termination(last.map(|l| class_tail(g, l)), &candidates);
            match decision.case {
                Termination::Continue => {}
                case => {
                    let note = match (decision.anomaly, d.state.ended) {
                        (true, _) => Some("tail reached with candidates remaining"),
                        (false, true) => Some("app reached its end state"),
                        _ => None,
                    };
                    return Ok(finish(d, case, decision.anomaly, None, note));
                }
            }
            if !visited.insert((d.state.screen.clone(), last)) {
                return Ok(finish(d, Termination::Failed, false, None, Some("revisited screen and context tail")));
            }
            if d.context.events.len() >= self.limits.step_cap {
                let mut partial = partial.clone();
                let events = d.context.events.len();
                partial.push(finish(d, Termination::Failed, false, None, Some("step cap exceeded")));
                return Err(EngineError::RunAborted {
                    cap: self.limits.step_cap,
                    sub: index,
                    events,
                    partial: Box::new(partial),
                });
            }
            let positive: Vec<&WidgetCandidate> = candidates.iter().filter(|c| c.probability > 0.0).collect();
            let (pick, variant) = match d.forced.take() {
                Some(f) => f,
                None => {
                    let at_branch = last.is_none_or(|l| class_branch(g, l));
                    if d.record_frames && at_branch {
                        let mut seen = BTreeSet::from([class_key(g, positive[0].entity)]);
                        let alternatives: Vec<WidgetCandidate> = positive[1..]
                            .iter()
                            .filter(|c| seen.insert(class_key(g, c.entity)))
                            .map(|c| (*c).clone())
                            .collect();
                        if !alternatives.is_empty() {
                            frames.push(BranchFrame {
                                branch: last,
                                prefix: d.context.events.clone(),
                                log: d.state.log.clone(),
                                alternatives,
                            });
                        }
                    }
                    (positive[0].clone(), SeedVariant::Valid)
                }
            };
            let ev = self.event_for(&d.state, &pick, variant)?;
            d.state = self.app.execute_event(
                &d.state,
                &SimEvent { widget_id: ev.widget_id.clone(), operation: ev.operation, parameter: ev.parameter.clone() },
            )?;
            d.context.events.push(ev);
            if let Some(bug) = d.state.crashed.clone() {
                return Ok(finish(d, Termination::Failed, false, Some(bug), Some("app crashed")));
            }
        }
    }

    fn replay(&self, prefix: &[TestEvent], expected: &[LogRecord]) -> Result<ScreenState, EngineError> {
        let events: Vec<SimEvent> = prefix
            .iter()
            .map(|e| SimEvent {
                widget_id: e.widget_id.clone(),
                operation: e.operation,
                parameter: e.parameter.clone(),
            })
            .collect();
        let state = reset_and_replay(self.app, &events)?;
        if let Some(i) = state.log.iter().zip(expected).position(|(a, b)| a != b) {
            return Err(SimError::ReplayDiverged { step: i + 1, reason: "logged outcome differs".into() }.into());
        }
        Ok(state)
    }
}

/// Depth-first coverage of the scenario's sub-scenarios on a simulated app.
pub fn run_scenario(
    app: &AppModel,
    graph: &Ekg,
    analyzer: &TextAnalyzer,
    seeds: &Seeds,
    limits: RunLimits,
) -> Result<ScenarioRunResult, EngineError> {
    if graph.scenario_id != app.scenario {
        return Err(EngineError::ScenarioMismatch { graph: graph.scenario_id.clone(), app: app.scenario.clone() });
    }
    let started = Instant::now();
    let runner = Runner { app, engine: QueryEngine::new(graph, analyzer, limits.theta), analyzer, seeds, limits };
    let mut result = ScenarioRunResult::new(&app.app_id, &app.scenario);
    let mut frames: Vec<BranchFrame> = Vec::new();
    let mut start =
        Drive { state: ScreenState::initial(app), context: TestContext::default(), forced: None, record_frames: true };
    loop {
        let sub = runner.drive(start, result.subs.len() + 1, &mut frames, &result)?;
        result.push(sub);
        // deepest frame with something left
        let Some(frame) = frames.last_mut() else { break };
        let alt = frame.alternatives.remove(0);
        let (prefix, log) = (frame.prefix.clone(), frame.log.clone());
        if frame.alternatives.is_empty() {
            frames.pop();
        }
        let state = runner.replay(&prefix, &log)?;
        result.reinitializations += 1;
        start = Drive {
            state,
            context: TestContext { events: prefix },
            forced: Some((alt, SeedVariant::Valid)),
            record_frames: true,
        };
    }
    if limits.sweep_invalid {
        sweep(&runner, &mut result)?;
    }
    result.wall_ms = started.elapsed().as_millis() as u64;
    Ok(result)
}

fn sweep(runner: &Runner<'_>, result: &mut ScenarioRunResult) -> Result<(), EngineError> {
    let mut runs = Vec::new();
    for sub in &result.subs {
        for (i, ev) in sub.events.iter().enumerate().skip(sub.replayed) {
            let Some(key) = &ev.seed_key else { continue };
            let entry = &runner.seeds.seeds[key];
            if entry.invalid.as_ref().is_none_or(|v| *v == entry.valid) {
                continue;
            }
            let prefix = &sub.events[..i];
            let state = runner.replay(prefix, &sub.log[..i])?;
            let gui = analyze_state(&runner.app.render_screen(&state.screen).unwrap(), runner.limits.merge_threshold);
            let Some(cand) = runner
                .engine
                .query(&gui, prefix.last().map(|e| e.entity))
                .into_iter()
                .find(|c| c.bbox == ev.bbox && c.entity == ev.entity)
            else {
                continue;
            };
            let d = Drive {
                state,
                context: TestContext { events: prefix.to_vec() },
                forced: Some((cand, SeedVariant::Invalid)),
                record_frames: false,
            };
            let run = match runner.drive(d, sub.index, &mut Vec::new(), result) {
                Ok(r) => r,
                Err(EngineError::RunAborted { mut partial, .. }) => partial.subs.pop().expect("aborted run recorded"),
                Err(e) => return Err(e),
            };
            runs.push(SweepRun { sub: sub.index, step: i + 1, seed_key: key.clone(), run });
        }
    }
    for r in &runs {
        if let Some(b) = &r.run.crash {
            result.crashes.insert(b.clone());
        }
    }
    result.sweeps = runs;
    Ok(())
}
