use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::sim::{AppModel, LogRecord, ScreenState, SimEvent};

/// Literals the baseline types into inputs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RandomPool(pub Vec<String>);

impl RandomPool {
    /// One literal per line; `#` comments, `<empty>` for the empty string.
    pub fn parse(src: &str) -> Self {
        RandomPool(
            src.lines()
                .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
                .map(|l| if l == "<empty>" { String::new() } else { l.to_string() })
                .collect(),
        )
    }
}

impl Default for RandomPool {
    fn default() -> Self {
        Self::parse(include_str!("../../data/random_strings.txt"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BaselineRun {
    pub seed: u64,
    /// Every executed event, steps numbered across restarts.
    pub log: Vec<LogRecord>,
    pub bugs: BTreeSet<String>,
    pub restarts: usize,
}

/// Uniform random legal events; the app is relaunched after each crash.
pub fn random_baseline(app: &AppModel, budget: usize, seed: u64, pool: &RandomPool) -> BaselineRun {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut run = BaselineRun { seed, log: Vec::new(), bugs: BTreeSet::new(), restarts: 0 };
    let mut state = ScreenState::initial(app);
    while run.log.len() < budget {
        let screen = app.screen(&state.screen).expect("session screen exists");
        let pairs: Vec<(&str, crate::text::Operation)> =
            screen.widgets.iter().flat_map(|w| w.actions.keys().map(move |op| (w.id.as_str(), *op))).collect();
        let Some(&(widget, op)) = pairs.choose(&mut rng) else { break };
        let param = op.takes_parameter().then(|| pool.0.choose(&mut rng).cloned().unwrap_or_default());
        let ev = SimEvent::new(widget, op, param.as_deref());
        let next = app.execute_event(&state, &ev).expect("baseline emits only accepted events");
        let mut rec = next.log.last().unwrap().clone();
        rec.step = run.log.len() + 1;
        run.log.push(rec);
        state = next;
        if let Some(b) = state.crashed.take() {
            run.bugs.insert(b);
            run.restarts += 1;
            state = ScreenState::initial(app);
        }
    }
    run
}
