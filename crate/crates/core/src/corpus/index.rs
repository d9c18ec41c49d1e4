use std::collections::HashSet;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use super::{stem_word, tokenize, trim_stopwords, StopWords};

/// One raw line of a textbook index.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexLine {
    /// Leading whitespace width; kept for reference, never used to join lines.
    pub indent_level: usize,
    pub text: String,
    /// Illustration phrase added by hand rather than taken from the book.
    #[serde(default)]
    pub synthetic: bool,
}

impl IndexLine {
    pub fn parse(line: &str, synthetic: bool) -> Self {
        let indent_level = line
            .chars()
            .take_while(|c| c.is_whitespace())
            .map(|c| if c == '\t' { 4 } else { 1 })
            .sum();
        IndexLine {
            indent_level,
            text: line.trim().to_string(),
            synthetic,
        }
    }
}

/// A normalized index entry: edge-trimmed, stemmed tokens.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IndexPhrase {
    pub tokens: Vec<String>,
    pub source_line: String,
    pub synthetic: bool,
}

impl IndexPhrase {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn text(&self) -> String {
        self.tokens.join(" ")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NormalizeOptions {
    pub stem: bool,
    pub strip_interior_stopwords: bool,
}

impl Default for NormalizeOptions {
    fn default() -> Self {
        Self {
            stem: true,
            strip_interior_stopwords: false,
        }
    }
}

static PAGE_LOCATORS: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"(?:\s*,\s*\d+(?:\s*[-\u{2013}]\s*\d+)?)+[\s.,;]*$").expect("valid regex")
});

static CROSS_REF: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?i)[,.;(]\s*see(?:\s+also)?\b.*$").expect("valid regex"));

/// Strips locators and inline cross references; `None` for lines that are
/// nothing but a cross reference.
fn clean_line(text: &str) -> Option<String> {
    let lower = text.trim().to_lowercase();
    if lower == "see" || lower.starts_with("see ") {
        return None;
    }
    let no_ref = CROSS_REF.replace(text, "");
    let no_pages = PAGE_LOCATORS.replace(&no_ref, "");
    Some(no_pages.into_owned())
}

/// Normalizes a single phrase string the same way index lines are.
pub fn normalize_phrase(text: &str, stopwords: &StopWords, opts: NormalizeOptions) -> Vec<String> {
    let raw = tokenize(text).tokens;
    let trimmed = trim_stopwords(&raw, stopwords);
    trimmed
        .iter()
        .filter(|t| !opts.strip_interior_stopwords || !stopwords.contains(t))
        .map(|t| if opts.stem { stem_word(t) } else { t.clone() })
        .collect()
}

/// Turns every index line into one phrase.
///
/// Indentation is ignored (sub-entries are not joined to their parent),
/// cross-reference lines are dropped, trailing page numbers removed, stop
/// words trimmed from the edges and each word stemmed. Empty results are
/// dropped and identical token sequences keep only their first line.
pub fn normalize_index(
    lines: &[IndexLine],
    stopwords: &StopWords,
    opts: NormalizeOptions,
) -> Vec<IndexPhrase> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for line in lines {
        let Some(cleaned) = clean_line(&line.text) else {
            continue;
        };
        let tokens = normalize_phrase(&cleaned, stopwords, opts);
        if tokens.is_empty() || !seen.insert(tokens.clone()) {
            continue;
        }
        out.push(IndexPhrase {
            tokens,
            source_line: line.text.clone(),
            synthetic: line.synthetic,
        });
    }
    if out.is_empty() && !lines.is_empty() {
        tracing::warn!("index normalized to zero phrases; analysis will find nothing");
    }
    out
}
