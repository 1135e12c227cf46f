#![allow(dead_code)]

pub mod props;
pub mod script;

use std::path::{Path, PathBuf};

use scengraph::ekg::{construct_with_log, BuildLog, BuildOptions, Counts};
use scengraph::engine::Seeds;
use scengraph::screen::{analyze_bundle, classify_widget, extract_widgets, LayoutTree, DEFAULT_MERGE_THRESHOLD};
use scengraph::sim::AppModel;
use scengraph::{load_corpus, BBox, Ekg, WidgetType};
use serde_json::{json, Value};

pub fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn graph(corpus: &str) -> (Ekg, BuildLog) {
    let reports = load_corpus(&fixtures().join("corpus").join(corpus)).expect("fixture corpus loads");
    construct_with_log(&reports, &BuildOptions::default()).expect("fixture corpus builds")
}

pub fn app(rel: &str) -> AppModel {
    AppModel::load(&fixtures().join("apps").join(format!("{rel}.toml"))).expect("fixture app loads")
}

pub fn seeds(scenario: &str) -> Seeds {
    Seeds::load(&fixtures().join("seeds").join(format!("{scenario}.toml"))).expect("fixture seeds load")
}

/// App under test with the corpus, seed table and golden file it pairs with.
pub struct Subject {
    pub app: &'static str,
    pub corpus: &'static str,
    pub seeds: &'static str,
}

pub const SUBJECTS: [Subject; 4] = [
    Subject { app: "holdout/login-holdout", corpus: "login10", seeds: "login" },
    Subject { app: "holdout/register-holdout", corpus: "register", seeds: "register" },
    Subject { app: "holdout/flight-holdout", corpus: "flight", seeds: "flight" },
    Subject { app: "linear", corpus: "linear", seeds: "checkout" },
];

pub fn golden(rel: &str) -> scengraph::eval::GoldenSet {
    scengraph::eval::GoldenSet::load(&fixtures().join("apps").join(format!("{rel}.golden.toml"))).expect("golden loads")
}

pub fn baseline_seeds() -> Vec<u64> {
    let src = std::fs::read_to_string(fixtures().join("baseline_seeds.txt")).expect("seed file");
    src.lines()
        .filter(|l| !l.starts_with('#'))
        .flat_map(str::split_whitespace)
        .map(|s| s.parse().expect("numeric seed"))
        .collect()
}

pub const CORPORA: [&str; 5] = ["login10", "illustrative", "register", "flight", "linear"];

pub fn oracle_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/tests/oracles")
}

pub fn frozen(corpus: &str) -> Value {
    let p = oracle_dir().join(format!("{corpus}.ledger.json"));
    serde_json::from_str(&std::fs::read_to_string(&p).unwrap()).unwrap()
}

pub fn ledger(corpus: &str) -> Value {
    let reports = scengraph::load_corpus(&fixtures().join("corpus").join(corpus)).unwrap();
    let (g, _) = graph(corpus);
    let Counts { entities, relations } = g.counts();
    let cnt = || g.entities_of(scengraph::EntityKind::Cnt);
    json!({
        "reports": reports.len(),
        "entities": entities.iter().map(|(k, v)| (k.name().to_string(), json!(v))).collect::<serde_json::Map<_, _>>(),
        "relations": relations.iter().map(|(k, v)| (k.name().to_string(), json!(v))).collect::<serde_json::Map<_, _>>(),
        "start": cnt().filter(|e| e.start_tag).count(),
        "tail": cnt().filter(|e| e.tail_tag).count(),
        "branch": cnt().filter(|e| e.branch_point).count(),
    })
}

pub fn fixture_apps() -> Vec<AppModel> {
    fn walk(dir: &Path, out: &mut Vec<AppModel>) {
        let mut entries: Vec<_> = std::fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
        entries.sort();
        for p in entries {
            if p.is_dir() {
                walk(&p, out);
            } else if p.extension().is_some_and(|e| e == "toml") && !p.to_string_lossy().ends_with(".golden.toml") {
                out.push(AppModel::load(&p).unwrap());
            }
        }
    }
    let mut apps = Vec::new();
    walk(&fixtures().join("apps"), &mut apps);
    assert!(apps.len() >= 10, "found {} apps", apps.len());
    apps
}

/// Renders every screen of an app and checks that screen analysis recovers
/// each declared widget; returns the number of widgets checked.
pub fn check_app_roundtrip(app: &AppModel) -> usize {
    let mut checked = 0;
    for screen in &app.screens {
        let bundle = app.render_screen(&screen.id).unwrap();
        let mut boxes = extract_widgets(&bundle.raster);
        for b in boxes.iter_mut() {
            b.widget_type = classify_widget(&bundle.raster, b, &bundle.text_layer);
        }
        assert_eq!(boxes.len(), screen.widgets.len(), "{}/{}: box count", app.app_id, screen.id);
        let gui = analyze_bundle(&bundle, DEFAULT_MERGE_THRESHOLD);
        for w in &screen.widgets {
            let at = format!("{}/{}/{}", app.app_id, screen.id, w.id);
            let found = boxes
                .iter()
                .find(|b| b.bbox.max_edge_delta(&w.bbox) <= 1)
                .unwrap_or_else(|| panic!("{at}: no box near {}", w.bbox));
            assert_eq!(found.widget_type, w.widget_type, "{at}");
            let g = gui.widgets.iter().find(|g| g.bbox == found.bbox).unwrap();
            let want = (w.widget_type != WidgetType::ImageView && !w.label.is_empty()).then(|| w.label.clone());
            assert_eq!(g.text, want, "{at}");
            checked += 1;
        }
        assert_band_rule(&gui.layout, &gui.widgets.iter().map(|w| w.bbox).collect::<Vec<_>>());
    }
    checked
}

/// Boxes whose top edges differ by less than the threshold share a row
/// band; inside a band, left edges closer than the threshold share a column.
fn assert_band_rule(layout: &LayoutTree, boxes: &[BBox]) {
    let (th, tw) = (DEFAULT_MERGE_THRESHOLD * layout.height as f64, DEFAULT_MERGE_THRESHOLD * layout.width as f64);
    let col_of = |b: &BBox| {
        let r = layout.row_of(b).unwrap();
        let c = layout.rows[r].columns.iter().position(|c| c.leaves.iter().any(|l| l.bbox == *b)).unwrap();
        (r, c)
    };
    for a in boxes {
        for b in boxes {
            if (a.y0.abs_diff(b.y0) as f64) < th {
                assert_eq!(layout.row_of(a), layout.row_of(b), "{a} {b}");
                if (a.x0.abs_diff(b.x0) as f64) < tw {
                    assert_eq!(col_of(a), col_of(b), "{a} {b}");
                }
            }
        }
    }
    assert_eq!(layout.leaf_count(), boxes.len());
}
