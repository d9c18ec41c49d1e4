use std::collections::BTreeSet;
use std::path::Path;

use super::tokenize;
use crate::{Error, Result};

const DEFAULT_LIST: &str = include_str!("../../data/stopwords.txt");

/// Lowercase function words ignored at the edges of index phrases.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StopWords(BTreeSet<String>);

impl StopWords {
    /// Parses one word per line; `#` starts a comment. Entries go through the
    /// tokenizer so "don't" is stored as "dont", matching transcript tokens.
    pub fn parse(text: &str) -> Self {
        let words = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or(""))
            .flat_map(|l| tokenize(l).tokens)
            .collect();
        StopWords(words)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(Self::parse(&text))
    }

    pub fn contains(&self, word: &str) -> bool {
        self.0.contains(word)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(String::as_str)
    }
}

impl Default for StopWords {
    fn default() -> Self {
        Self::parse(DEFAULT_LIST)
    }
}

impl<S: Into<String>> FromIterator<S> for StopWords {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        StopWords(iter.into_iter().map(Into::into).collect())
    }
}

/// Drops stop words from both ends of `tokens`; interior ones stay.
pub fn trim_stopwords<'a>(tokens: &'a [String], stopwords: &StopWords) -> &'a [String] {
    let start = tokens
        .iter()
        .position(|t| !stopwords.contains(t))
        .unwrap_or(tokens.len());
    let end = tokens
        .iter()
        .rposition(|t| !stopwords.contains(t))
        .map_or(start, |i| i + 1);
    &tokens[start..end]
}
