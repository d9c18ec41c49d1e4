use serde::{Deserialize, Serialize};

/// Token stream of one document.
///
/// `source_positions[i]` is the offset of `tokens[i]` in the raw token
/// stream produced by [`tokenize`]. Stemming is one-to-one, so the two
/// lists stay parallel.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenSeq {
    pub tokens: Vec<String>,
    pub source_positions: Vec<usize>,
}

impl TokenSeq {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Applies `f` to every token, keeping positions.
    pub fn map_tokens(&self, f: impl Fn(&str) -> String) -> TokenSeq {
        TokenSeq {
            tokens: self.tokens.iter().map(|t| f(t)).collect(),
            source_positions: self.source_positions.clone(),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.tokens.iter().map(String::as_str)
    }
}

/// Splits text into lowercase word tokens.
///
/// Any character that is not alphanumeric separates tokens, except
/// apostrophes, which are dropped in place ("question's" -> "questions").
/// Digit-only tokens are kept.
pub fn tokenize(text: &str) -> TokenSeq {
    let mut tokens = Vec::new();
    let mut current = String::new();
    for ch in text.chars() {
        if ch.is_alphanumeric() {
            current.extend(ch.to_lowercase().filter(|c| c.is_alphanumeric()));
        } else if ch == '\'' || ch == '\u{2019}' {
            continue;
        } else if !current.is_empty() {
            tokens.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    let source_positions = (0..tokens.len()).collect();
    TokenSeq {
        tokens,
        source_positions,
    }
}
