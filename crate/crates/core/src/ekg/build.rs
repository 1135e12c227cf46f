//! Report-by-report accumulation: entity extraction from screenshots and
//! sentences, relationship typing, order and tags, then coreference.

use crate::corpus::{validate_report, TestReport};
use crate::screen::{analyze_bundle, DEFAULT_MERGE_THRESHOLD};
use crate::text::{parse_step, split_type_noun, TextAnalyzer, TextProfile, TypeNoun, DEFAULT_THETA};

use super::{canonical_label, Ekg, EkgError, EntityId, EntityKind, NewEntity, Origin, RelationKind, RelationOutcome};

#[derive(Debug, Clone)]
pub struct BuildOptions {
    pub theta: f64,
    pub merge_threshold: f64,
    pub analyzer: TextAnalyzer,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            theta: DEFAULT_THETA,
            merge_threshold: DEFAULT_MERGE_THRESHOLD,
            analyzer: TextAnalyzer::default(),
        }
    }
}

/// Human-readable construction notes, in the order they arose.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BuildLog {
    pub lines: Vec<String>,
}

impl BuildLog {
    fn note(&mut self, s: String) {
        self.lines.push(s);
    }
}

struct ScreenCnt {
    id: EntityId,
    text: String,
    label: String,
}

struct Builder<'a> {
    g: Ekg,
    opts: &'a BuildOptions,
    log: BuildLog,
    profiles: Vec<TextProfile>,
    resolved: usize,
}

impl Builder<'_> {
    fn entity(&mut self, e: NewEntity) -> EntityId {
        let id = self.g.append_entity(e).expect("builder emits valid entities");
        while self.profiles.len() < self.g.entities().len() {
            let label = &self.g.entities()[self.profiles.len()].label;
            self.profiles.push(self.opts.analyzer.profile(label));
        }
        id
    }

    fn relate(&mut self, a: EntityId, b: EntityId, kind: RelationKind, weight: Option<f64>) {
        let out = self.g.append_relation(a, b, kind, weight).expect("builder emits valid relations");
        match out {
            RelationOutcome::LoopAvoided | RelationOutcome::CycleAvoided => {
                let name = |id: EntityId| {
                    let e = self.g.entity(id).unwrap();
                    format!("{} {:?}", e.kind, e.label)
                };
                self.log.note(format!("{out:?}: {kind} {} - {}", name(a), name(b)));
            }
            RelationOutcome::Stored | RelationOutcome::AlreadyPresent => {}
        }
    }

    fn screen_entities(&mut self, report: &TestReport, step: u32, cnts: &mut Vec<ScreenCnt>) {
        let Some(bundle) = report.steps[step as usize - 1].screen.as_ref() else { return };
        let gui = analyze_bundle(bundle, self.opts.merge_threshold);
        for w in &gui.widgets {
            let Some(text) = w.text.as_deref().map(canonical_label).filter(|t| !t.is_empty()) else { continue };
            if w.widget_type == crate::screen::WidgetType::Unknown {
                continue;
            }
            let ty = w.widget_type.name();
            let label = format!("{text} {}", ty.to_lowercase());
            let rid = &report.report_id;
            let cnt = self.entity(NewEntity::new(EntityKind::Cnt, &label).attribute("widget_type", ty).provenance(
                rid,
                step,
                Origin::Screen,
            ));
            let wid = self.entity(NewEntity::new(EntityKind::Wid, ty).provenance(rid, step, Origin::Screen));
            let txt = self.entity(NewEntity::new(EntityKind::Txt, &text).origin(Origin::Screen).provenance(
                rid,
                step,
                Origin::Screen,
            ));
            self.relate(cnt, wid, RelationKind::CntWidConcreteWidget, None);
            self.relate(cnt, txt, RelationKind::CntTxtConcreteText, None);
            cnts.push(ScreenCnt { id: cnt, text, label });
        }
    }

    fn report(&mut self, report: &TestReport) {
        for w in validate_report(report) {
            self.log.note(format!("{}: {w}", report.report_id));
        }
        let rid = report.report_id.as_str();
        let analyzer = &self.opts.analyzer.clone();
        let mut prev: Option<EntityId> = None;
        let mut first: Option<EntityId> = None;
        for step in &report.steps {
            let mut cnts = Vec::new();
            self.screen_entities(report, step.index, &mut cnts);
            let triples = match parse_step(analyzer, &analyzer.segment(&step.text)) {
                Ok(t) => t,
                Err(e) => {
                    self.log.note(format!("{rid} step {}: skipped, {e}", step.index));
                    continue;
                }
            };
            for t in triples {
                let opt = self.entity(NewEntity::new(EntityKind::Opt, t.operation.name()).provenance(
                    rid,
                    step.index,
                    Origin::Text,
                ));
                let (head, noun) = split_type_noun(analyzer, &t.widget_phrase);
                let head_p = analyzer.profile(&head);
                let phrase_p = analyzer.profile(&t.widget_phrase);
                let mut bound: Option<(EntityId, f64)> = None;
                for c in &cnts {
                    let s = analyzer
                        .similarity_profiles(&head_p, &analyzer.profile(&c.text))
                        .max(analyzer.similarity_profiles(&phrase_p, &analyzer.profile(&c.label)));
                    if s >= self.opts.theta && bound.is_none_or(|(_, b)| s > b) {
                        bound = Some((c.id, s));
                    }
                }
                let cnt =
                    match bound {
                        Some((id, _)) => {
                            self.g
                                .append_entity(
                                    NewEntity::new(EntityKind::Cnt, &self.g.entity(id).unwrap().label.clone())
                                        .provenance(rid, step.index, Origin::Text),
                                )
                                .expect("existing entity");
                            id
                        }
                        None => {
                            let cnt = self.entity(NewEntity::new(EntityKind::Cnt, &t.widget_phrase).provenance(
                                rid,
                                step.index,
                                Origin::Text,
                            ));
                            if let Some(TypeNoun::Widget(ty)) = noun {
                                let wid = self.entity(NewEntity::new(EntityKind::Wid, ty.name()).provenance(
                                    rid,
                                    step.index,
                                    Origin::Text,
                                ));
                                self.relate(cnt, wid, RelationKind::CntWidConcreteWidget, None);
                            }
                            cnt
                        }
                    };
                let txt = self.entity(NewEntity::new(EntityKind::Txt, &head).origin(Origin::Text).provenance(
                    rid,
                    step.index,
                    Origin::Text,
                ));
                self.relate(cnt, txt, RelationKind::CntTxtConcreteText, None);
                self.relate(cnt, opt, RelationKind::CntOptOperate, None);
                if let Some(p) = &t.parameter {
                    let key = format!("literal:{}", t.operation.name());
                    let label = self.g.entity(cnt).unwrap().label.clone();
                    self.g
                        .append_entity(NewEntity::new(EntityKind::Cnt, &label).attribute(&key, p))
                        .expect("existing entity");
                }
                if let Some(p) = prev.filter(|p| *p != cnt) {
                    self.relate(p, cnt, RelationKind::CntCntOrder, None);
                }
                prev = Some(cnt);
                first.get_or_insert(cnt);
            }
        }
        if let Some(f) = first {
            self.g.set_tags(f, true, false);
        }
        if let Some(l) = prev {
            self.g.set_tags(l, false, true);
        }
        self.coreference();
        self.g.recompute_branch_points();
    }

    /// Links every same-kind CNT or TXT pair whose similarity reaches the
    /// threshold. Pairs of entities that were both present at the previous
    /// pass were already evaluated and are skipped.
    fn coreference(&mut self) {
        let n = self.g.entities().len();
        for j in self.resolved..n {
            for i in 0..j {
                let (ei, ej) = (&self.g.entities()[i], &self.g.entities()[j]);
                let kind = match (ei.kind, ej.kind) {
                    (EntityKind::Cnt, EntityKind::Cnt) => RelationKind::CntCntSimilar,
                    (EntityKind::Txt, EntityKind::Txt) => RelationKind::TxtTxtSimilar,
                    _ => continue,
                };
                let s = self.opts.analyzer.similarity_profiles(&self.profiles[i], &self.profiles[j]);
                if s >= self.opts.theta {
                    self.relate(EntityId(i as u32), EntityId(j as u32), kind, Some(s));
                }
            }
        }
        self.resolved = n;
    }
}

/// Builds a graph from reports of one scenario, processing them in the
/// given order.
pub fn construct_with_log(reports: &[TestReport], opts: &BuildOptions) -> Result<(Ekg, BuildLog), EkgError> {
    let scenario = reports.first().map(|r| r.scenario_id.clone()).unwrap_or_default();
    if let Some(r) = reports.iter().find(|r| r.scenario_id != scenario) {
        return Err(EkgError::Usage(format!(
            "report {} belongs to scenario {:?}, expected {scenario:?}",
            r.report_id, r.scenario_id
        )));
    }
    let mut b = Builder { g: Ekg::new(&scenario), opts, log: BuildLog::default(), profiles: Vec::new(), resolved: 0 };
    for r in reports {
        b.report(r);
    }
    Ok((b.g, b.log))
}

pub fn construct_from_reports(reports: &[TestReport]) -> Result<Ekg, EkgError> {
    construct_with_log(reports, &BuildOptions::default()).map(|(g, _)| g)
}
