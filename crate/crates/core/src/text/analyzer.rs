use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use super::lexicon::{Lexicon, StopWords};
use super::Operation;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Token {
    pub text: String,
    /// Quoted in the source; kept verbatim and never stop-word filtered.
    pub literal: bool,
}

impl Token {
    pub fn word(s: &str) -> Self {
        Token { text: s.to_string(), literal: false }
    }

    pub fn literal(s: &str) -> Self {
        Token { text: s.to_string(), literal: true }
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.literal {
            write!(f, "{:?}", self.text)
        } else {
            f.write_str(&self.text)
        }
    }
}

/// Precomputed view of a string for repeated similarity queries.
#[derive(Debug, Clone, PartialEq)]
pub struct TextProfile {
    /// Whitespace-collapsed form; words lowercased, literals verbatim.
    pub normalized: String,
    /// Lexicon group the whole string belongs to, if any.
    pub group: Option<usize>,
    pub tokens: Vec<Token>,
    /// Canonicalized token counts.
    pub bag: BTreeMap<String, u32>,
}

/// Second-step similarity backend. Implementations must be symmetric and
/// return values in `[0, 1]`; the analyzer clamps regardless.
pub trait VectorSimilarity: Send + Sync {
    fn score(&self, a: &TextProfile, b: &TextProfile) -> f64;
}

/// Cosine similarity of canonicalized token-count vectors.
#[derive(Debug, Clone, Copy, Default)]
pub struct CosineBagOfWords;

impl VectorSimilarity for CosineBagOfWords {
    fn score(&self, a: &TextProfile, b: &TextProfile) -> f64 {
        let (small, large) = if a.bag.len() <= b.bag.len() { (&a.bag, &b.bag) } else { (&b.bag, &a.bag) };
        let dot: u64 = small.iter().filter_map(|(k, x)| large.get(k).map(|y| *x as u64 * *y as u64)).sum();
        if dot == 0 {
            return 0.0;
        }
        let na: u64 = a.bag.values().map(|x| (*x as u64).pow(2)).sum();
        let nb: u64 = b.bag.values().map(|x| (*x as u64).pow(2)).sum();
        dot as f64 / ((na * nb) as f64).sqrt()
    }
}

const OPEN_QUOTES: [char; 4] = ['"', '\'', '\u{201C}', '\u{2018}'];

fn closers(open: char) -> &'static [char] {
    match open {
        '"' | '\u{201C}' => &['"', '\u{201D}'],
        _ => &['\'', '\u{2019}'],
    }
}

fn is_boundary(c: Option<char>) -> bool {
    match c {
        None => true,
        Some(c) => c.is_whitespace() || matches!(c, ',' | '.' | ';' | ':' | '!' | '?' | ')'),
    }
}

/// Raw units of a sentence before lexicon joining: lowercased words with
/// edge punctuation stripped, and verbatim quoted literals.
fn split_units(text: &str) -> Vec<Token> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut word = String::new();
    let flush = |word: &mut String, out: &mut Vec<Token>| {
        let w = word.trim_matches(|c: char| !c.is_alphanumeric()).to_lowercase();
        if !w.is_empty() {
            out.push(Token { text: w, literal: false });
        }
        word.clear();
    };
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let at_start = i == 0 || chars[i - 1].is_whitespace() || chars[i - 1] == '(';
        if at_start && word.is_empty() && OPEN_QUOTES.contains(&c) {
            let close = closers(c);
            let end =
                (i + 1..chars.len()).find(|&j| close.contains(&chars[j]) && is_boundary(chars.get(j + 1).copied()));
            if let Some(j) = end {
                let lit: String = chars[i + 1..j].iter().collect();
                out.push(Token { text: lit.trim().to_string(), literal: true });
                i = j + 1;
                continue;
            }
        }
        if c.is_whitespace() {
            flush(&mut word, &mut out);
        } else {
            word.push(c);
        }
        i += 1;
    }
    flush(&mut word, &mut out);
    out
}

/// Lexicon, stop words and similarity backend bundled for reuse.
#[derive(Clone)]
pub struct TextAnalyzer {
    lexicon: Arc<Lexicon>,
    stopwords: Arc<StopWords>,
    vector: Arc<dyn VectorSimilarity>,
}

impl fmt::Debug for TextAnalyzer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TextAnalyzer").field("groups", &self.lexicon.groups().len()).finish_non_exhaustive()
    }
}

impl Default for TextAnalyzer {
    fn default() -> Self {
        TextAnalyzer::new(Lexicon::default(), StopWords::default())
    }
}

impl TextAnalyzer {
    pub fn new(lexicon: Lexicon, stopwords: StopWords) -> Self {
        TextAnalyzer { lexicon: Arc::new(lexicon), stopwords: Arc::new(stopwords), vector: Arc::new(CosineBagOfWords) }
    }

    pub fn with_vector(mut self, vector: Arc<dyn VectorSimilarity>) -> Self {
        self.vector = vector;
        self
    }

    pub fn lexicon(&self) -> &Lexicon {
        &self.lexicon
    }

    /// Units with multiword lexicon terms joined, before stop-word removal.
    fn joined_units(&self, text: &str) -> Vec<Token> {
        let units = split_units(text);
        let max = self.lexicon.max_words();
        let mut out = Vec::with_capacity(units.len());
        let mut i = 0;
        while i < units.len() {
            if units[i].literal {
                out.push(units[i].clone());
                i += 1;
                continue;
            }
            let run = units[i..].iter().take_while(|t| !t.literal).count().min(max);
            let joined = (2..=run).rev().find_map(|n| {
                let cand = units[i..i + n].iter().map(|t| t.text.as_str()).collect::<Vec<_>>().join(" ");
                self.lexicon.contains(&cand).then_some((cand, n))
            });
            match joined {
                Some((term, n)) => {
                    out.push(Token { text: term, literal: false });
                    i += n;
                }
                None => {
                    out.push(units[i].clone());
                    i += 1;
                }
            }
        }
        out
    }

    /// Lowercased word tokens with stop words removed; quoted literals kept
    /// verbatim as single tokens. Multiword lexicon terms are joined before
    /// filtering, so "sign in" survives as one token.
    pub fn segment(&self, text: &str) -> Vec<Token> {
        self.joined_units(text).into_iter().filter(|t| t.literal || !self.stopwords.contains(&t.text)).collect()
    }

    /// Representative of the term's synonym group, or the term itself.
    pub fn canonical<'a>(&'a self, term: &'a str) -> &'a str {
        match self.lexicon.group_of(term) {
            Some(g) => self.lexicon.representative(g),
            None => term,
        }
    }

    /// Operation named by a word token, if any.
    pub fn operation_of(&self, token: &Token) -> Option<Operation> {
        if token.literal {
            return None;
        }
        let canon = self.canonical(&token.text);
        Operation::ALL.into_iter().find(|op| self.canonical(op.lexicon_term()) == canon)
    }

    pub fn profile(&self, text: &str) -> TextProfile {
        let units = self.joined_units(text);
        let normalized = units
            .iter()
            .map(|t| if t.literal { format!("\"{}\"", t.text) } else { t.text.clone() })
            .collect::<Vec<_>>()
            .join(" ");
        let whole = units.iter().map(|t| t.text.as_str()).collect::<Vec<_>>().join(" ");
        let group = if units.iter().any(|t| t.literal) { None } else { self.lexicon.group_of(&whole) };
        let tokens: Vec<Token> = units.into_iter().filter(|t| t.literal || !self.stopwords.contains(&t.text)).collect();
        let mut bag = BTreeMap::new();
        for t in &tokens {
            let key = if t.literal { t.text.clone() } else { self.canonical(&t.text).to_string() };
            *bag.entry(key).or_insert(0) += 1;
        }
        TextProfile { normalized, group, tokens, bag }
    }

    /// Same lexicon group after normalization. Every string is its own
    /// synonym.
    pub fn is_synonym(&self, a: &str, b: &str) -> bool {
        let (pa, pb) = (self.profile(a), self.profile(b));
        Self::synonym_profiles(&pa, &pb)
    }

    fn synonym_profiles(a: &TextProfile, b: &TextProfile) -> bool {
        a.normalized == b.normalized || (a.group.is_some() && a.group == b.group)
    }

    /// Two-step similarity: 1.0 for synonyms, otherwise the vector backend
    /// clamped to `[0, 1]`.
    pub fn similarity(&self, a: &str, b: &str) -> f64 {
        self.similarity_profiles(&self.profile(a), &self.profile(b))
    }

    pub fn similarity_profiles(&self, a: &TextProfile, b: &TextProfile) -> f64 {
        if Self::synonym_profiles(a, b) {
            return 1.0;
        }
        let s = self.vector.score(a, b);
        if s.is_nan() {
            0.0
        } else {
            s.clamp(0.0, 1.0)
        }
    }
}
