//! Step-sentence analysis: segmentation, operation-triple parsing over a
//! controlled grammar, and the two-step similarity (synonym lexicon, then a
//! pluggable vector measure) shared by coreference resolution and queries.

mod analyzer;
mod grammar;
mod lexicon;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use analyzer::{CosineBagOfWords, TextAnalyzer, TextProfile, Token, VectorSimilarity};
pub use grammar::{parse_step, split_type_noun, OpTriple, TypeNoun};
pub use lexicon::{Lexicon, StopWords};

/// Similarity at or above which two texts corefer or a widget matches an
/// entity.
pub const DEFAULT_THETA: f64 = 0.8;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TextError {
    #[error("lexicon line {line}: term {term:?} already belongs to another group")]
    OverlappingGroups { line: usize, term: String },
    #[error("no operation verb in step {0:?}")]
    UnparsableStep(String),
    #[error("unknown operation {0:?}")]
    UnknownOperation(String),
}

/// Closed operation vocabulary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Operation {
    Click,
    LongClick,
    Input,
    Slide,
    Choose,
    Check,
}

impl Operation {
    pub const ALL: [Operation; 6] = [
        Operation::Click,
        Operation::LongClick,
        Operation::Input,
        Operation::Slide,
        Operation::Choose,
        Operation::Check,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Operation::Click => "click",
            Operation::LongClick => "long_click",
            Operation::Input => "input",
            Operation::Slide => "slide",
            Operation::Choose => "choose",
            Operation::Check => "check",
        }
    }

    /// The lexicon term whose synonym group names this operation.
    pub fn lexicon_term(self) -> &'static str {
        match self {
            Operation::LongClick => "long click",
            other => other.name(),
        }
    }

    /// Input text and slide scale are carried as parameters; every other
    /// operation takes none.
    pub fn takes_parameter(self) -> bool {
        matches!(self, Operation::Input | Operation::Slide)
    }
}

impl fmt::Display for Operation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Operation {
    type Err = TextError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.trim().to_lowercase().replace([' ', '-'], "_");
        Operation::ALL
            .into_iter()
            .find(|op| op.name() == norm)
            .ok_or_else(|| TextError::UnknownOperation(s.to_string()))
    }
}
