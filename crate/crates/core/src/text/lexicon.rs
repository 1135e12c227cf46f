use std::collections::{HashMap, HashSet};

use super::TextError;

const DEFAULT_LEXICON: &str = include_str!("../../data/synonyms.txt");
const DEFAULT_STOPWORDS: &str = include_str!("../../data/stopwords.txt");

/// Disjoint synonym groups. Terms are lowercase and may span several words.
#[derive(Debug, Clone)]
pub struct Lexicon {
    groups: Vec<Vec<String>>,
    index: HashMap<String, usize>,
    max_words: usize,
}

impl Lexicon {
    /// Parses one comma-separated group per line; `#` starts a comment.
    pub fn parse(src: &str) -> Result<Self, TextError> {
        let mut groups: Vec<Vec<String>> = Vec::new();
        let mut index = HashMap::new();
        let mut max_words = 1;
        for (lineno, line) in src.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let gid = groups.len();
            let mut group = Vec::new();
            for term in line.split(',') {
                let term = term.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase();
                if term.is_empty() {
                    continue;
                }
                if index.insert(term.clone(), gid).is_some_and(|g| g != gid) || group.contains(&term) {
                    return Err(TextError::OverlappingGroups { line: lineno + 1, term });
                }
                max_words = max_words.max(term.split(' ').count());
                group.push(term);
            }
            if !group.is_empty() {
                groups.push(group);
            }
        }
        Ok(Lexicon { groups, index, max_words })
    }

    pub fn group_of(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }

    /// Canonical representative (first listed term) of a group.
    pub fn representative(&self, group: usize) -> &str {
        &self.groups[group][0]
    }

    pub fn groups(&self) -> &[Vec<String>] {
        &self.groups
    }

    pub fn contains(&self, term: &str) -> bool {
        self.index.contains_key(term)
    }

    pub(crate) fn max_words(&self) -> usize {
        self.max_words
    }
}

impl Default for Lexicon {
    fn default() -> Self {
        Lexicon::parse(DEFAULT_LEXICON).expect("bundled lexicon is well-formed")
    }
}

#[derive(Debug, Clone)]
pub struct StopWords(HashSet<String>);

impl StopWords {
    /// One word per line.
    pub fn parse(src: &str) -> Self {
        StopWords(
            src.lines()
                .map(|l| l.split('#').next().unwrap_or("").trim().to_lowercase())
                .filter(|w| !w.is_empty())
                .collect(),
        )
    }

    pub fn contains(&self, w: &str) -> bool {
        self.0.contains(w)
    }
}

impl Default for StopWords {
    fn default() -> Self {
        StopWords::parse(DEFAULT_STOPWORDS)
    }
}
