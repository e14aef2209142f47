//! Text normalization, tokenization, stop-word removal and n-gram terms.
//!
//! `normalize` strips markup tags and entities, lowercases, and collapses
//! punctuation to spaces, keeping intra-word hyphens and a configurable
//! exception lexicon (`c++`, `.net`, ...) intact. Terms are unigrams plus
//! adjacent bigrams formed over the stop-word-filtered token sequence.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

const DEFAULT_STOPWORDS: &str = include_str!("../data/stopwords.txt");

/// Tokens preserved verbatim by `normalize` even though they contain
/// punctuation.
pub const DEFAULT_EXCEPTIONS: &[&str] = &["c++", "c#", ".net"];

/// A set of words removed during tokenization.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StopList {
    words: BTreeSet<String>,
}

impl StopList {
    /// The built-in English list (~150 words).
    pub fn default_english() -> StopList {
        Self::parse(DEFAULT_STOPWORDS)
    }

    pub fn empty() -> StopList {
        StopList::default()
    }

    pub fn from_words<I: IntoIterator<Item = S>, S: AsRef<str>>(words: I) -> StopList {
        StopList {
            words: words
                .into_iter()
                .map(|w| w.as_ref().to_lowercase())
                .collect(),
        }
    }

    /// Loads a list from a file: one word per line, `#` comments allowed.
    pub fn from_file(path: impl AsRef<Path>) -> Result<StopList> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io_at(path, e))?;
        Ok(Self::parse(&text))
    }

    fn parse(text: &str) -> StopList {
        let words = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(str::to_lowercase)
            .collect();
        StopList { words }
    }

    pub fn contains(&self, word: &str) -> bool {
        self.words.contains(word)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.words.iter().map(String::as_str)
    }
}

/// An ordered sequence of terms extracted from one source document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TermSequence {
    pub source_id: String,
    pub terms: Vec<String>,
}

impl TermSequence {
    pub fn new(source_id: impl Into<String>, terms: Vec<String>) -> TermSequence {
        TermSequence {
            source_id: source_id.into(),
            terms,
        }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Term → occurrence count within this sequence.
    pub fn counts(&self) -> BTreeMap<&str, u32> {
        let mut counts = BTreeMap::new();
        for t in &self.terms {
            *counts.entry(t.as_str()).or_insert(0) += 1;
        }
        counts
    }
}

/// Normalizes with the default exception lexicon.
pub fn normalize(text: &str) -> String {
    let exceptions = DEFAULT_EXCEPTIONS.iter().map(|s| s.to_string()).collect();
    normalize_with(text, &exceptions)
}

/// Lowercases, strips markup tags and entities, and collapses
/// non-alphanumeric runs to single spaces. Hyphens between alphanumerics
/// survive; tokens in the exception lexicon survive verbatim.
///
/// Idempotent: `normalize_with(normalize_with(s)) == normalize_with(s)`.
pub fn normalize_with(text: &str, exceptions: &BTreeSet<String>) -> String {
    let stripped = strip_markup(text).to_lowercase();
    let mut out = String::with_capacity(stripped.len());
    for raw in stripped.split_whitespace() {
        let cleaned = match match_exception(raw, exceptions) {
            Some(tok) => tok.to_string(),
            None => clean_token(raw),
        };
        for piece in cleaned.split_whitespace() {
            if !out.is_empty() {
                out.push(' ');
            }
            out.push_str(piece);
        }
    }
    out
}

/// Replaces `<...>` tags and `&name;` / `&#num;` entities with spaces.
/// A `<` without a closing `>` is left for the punctuation pass.
fn strip_markup(text: &str) -> String {
    let chars: Vec<char> = text.chars().collect();
    let mut out = String::with_capacity(text.len());
    let mut i = 0;
    while i < chars.len() {
        match chars[i] {
            '<' => {
                if let Some(close) = chars[i..].iter().position(|&c| c == '>') {
                    out.push(' ');
                    i += close + 1;
                } else {
                    out.push(' ');
                    i += 1;
                }
            }
            '&' => {
                let body = chars[i + 1..]
                    .iter()
                    .take_while(|c| c.is_alphanumeric() || **c == '#')
                    .count();
                if body > 0 && chars.get(i + 1 + body) == Some(&';') {
                    out.push(' ');
                    i += body + 2;
                } else {
                    out.push('&');
                    i += 1;
                }
            }
            c => {
                out.push(c);
                i += 1;
            }
        }
    }
    out
}

/// Finds an exception token inside `raw` after peeling non-alphanumeric
/// characters from either end (`"(.net,"` → `".net"`).
fn match_exception<'a>(raw: &'a str, exceptions: &BTreeSet<String>) -> Option<&'a str> {
    if exceptions.is_empty() {
        return None;
    }
    let chars: Vec<(usize, char)> = raw.char_indices().collect();
    let leading = chars
        .iter()
        .take_while(|(_, c)| !c.is_alphanumeric())
        .count();
    let trailing = chars
        .iter()
        .rev()
        .take_while(|(_, c)| !c.is_alphanumeric())
        .count();
    for skip_front in 0..=leading {
        for skip_back in 0..=trailing {
            if skip_front + skip_back >= chars.len() {
                continue;
            }
            let start = chars[skip_front].0;
            let end = match chars.get(chars.len() - skip_back) {
                Some(&(idx, _)) => idx,
                None => raw.len(),
            };
            if start >= end {
                continue;
            }
            let candidate = &raw[start..end];
            if exceptions.contains(candidate) {
                return Some(candidate);
            }
        }
    }
    None
}

/// Keeps alphanumerics and intra-word hyphens; everything else becomes a
/// space.
fn clean_token(raw: &str) -> String {
    let chars: Vec<char> = raw.chars().collect();
    let mut out = String::with_capacity(raw.len());
    for (i, &c) in chars.iter().enumerate() {
        if c.is_alphanumeric() {
            out.push(c);
        } else if c == '-'
            && i > 0
            && i + 1 < chars.len()
            && chars[i - 1].is_alphanumeric()
            && chars[i + 1].is_alphanumeric()
        {
            out.push('-');
        } else {
            out.push(' ');
        }
    }
    out
}

/// Splits normalized text on whitespace and drops stop words, preserving
/// order.
pub fn tokenize(source_id: &str, text: &str, stops: &StopList) -> TermSequence {
    let terms = text
        .split_whitespace()
        .filter(|t| !stops.contains(t))
        .map(str::to_string)
        .collect();
    TermSequence::new(source_id, terms)
}

/// All unigrams followed by all adjacent bigrams (`max_n == 2`), or the
/// unigrams alone (`max_n == 1`). Bigrams join two unigrams with a single
/// space and are formed over the stop-word-filtered sequence.
pub fn ngrams(tokens: &TermSequence, max_n: usize) -> Result<TermSequence> {
    if !(1..=2).contains(&max_n) {
        return Err(Error::Parameter(format!(
            "max_n must be 1 or 2, got {max_n}"
        )));
    }
    let mut terms = tokens.terms.clone();
    if max_n == 2 {
        for pair in tokens.terms.windows(2) {
            terms.push(format!("{} {}", pair[0], pair[1]));
        }
    }
    Ok(TermSequence::new(tokens.source_id.clone(), terms))
}

/// Terms whose count meets the threshold.
pub fn min_count_filter(
    counts: &BTreeMap<String, u32>,
    threshold: u32,
) -> Result<BTreeSet<String>> {
    if threshold < 1 {
        return Err(Error::Parameter(format!(
            "threshold must be >= 1, got {threshold}"
        )));
    }
    Ok(counts
        .iter()
        .filter(|(_, &c)| c >= threshold)
        .map(|(t, _)| t.clone())
        .collect())
}

/// The full text → terms pipeline used by clustering, indexing and the
/// coarse classifier: normalize, tokenize, n-grams.
#[derive(Debug, Clone)]
pub struct TextPipeline {
    pub stops: StopList,
    pub exceptions: BTreeSet<String>,
    pub max_n: usize,
}

impl Default for TextPipeline {
    fn default() -> Self {
        TextPipeline {
            stops: StopList::default_english(),
            exceptions: DEFAULT_EXCEPTIONS.iter().map(|s| s.to_string()).collect(),
            max_n: 2,
        }
    }
}

impl TextPipeline {
    pub fn normalize(&self, text: &str) -> String {
        normalize_with(text, &self.exceptions)
    }

    pub fn terms(&self, source_id: &str, text: &str) -> Result<TermSequence> {
        let normalized = self.normalize(text);
        let tokens = tokenize(source_id, &normalized, &self.stops);
        ngrams(&tokens, self.max_n)
    }
}
