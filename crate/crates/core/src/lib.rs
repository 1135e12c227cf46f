//! Scenario-guided GUI test generation over event knowledge graphs.
//!
//! The pipeline has two halves. The construction half ingests test-report
//! bundles ([`corpus`]), extracts operation triples from step sentences
//! ([`text`]) and widgets from step screenshots ([`screen`]), and accumulates
//! them into an event knowledge graph ([`ekg`]). The exploration half drives a
//! simulated app ([`sim`]) with that graph as its guide ([`engine`]), and
//! [`eval`] scores the outcome against authored golden paths and a seeded
//! random baseline.

pub mod corpus;
pub mod ekg;
pub mod engine;
pub mod eval;
pub mod screen;
pub mod sim;
pub mod text;

pub use corpus::{load_corpus, save_corpus, ScreenBundle, TestReport};
pub use ekg::{construct_from_reports, Ekg, EntityId, EntityKind, RelationKind};
pub use screen::{BBox, ScreenRaster, WidgetType};
pub use text::{Operation, TextAnalyzer, DEFAULT_THETA};
