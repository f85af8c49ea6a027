//! Caption normalization.
//!
//! Every caption that reaches the scorer goes through [`normalize_text`]:
//! lowercase, ASCII punctuation replaced by spaces, split on whitespace.

use std::fmt;

/// A normalized caption. Tokens are lowercase, non-empty and contain no
/// whitespace; the only way to build one is [`normalize_text`].
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct TokenSeq {
    tokens: Vec<String>,
}

impl TokenSeq {
    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

impl fmt::Display for TokenSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.tokens.join(" "))
    }
}

impl From<&str> for TokenSeq {
    fn from(raw: &str) -> Self {
        normalize_text(raw)
    }
}

pub fn normalize_text(raw: &str) -> TokenSeq {
    let cleaned: String = raw.chars().map(|c| if c.is_ascii_punctuation() { ' ' } else { c }).collect::<String>().to_lowercase();
    TokenSeq { tokens: cleaned.split_whitespace().map(str::to_owned).collect() }
}
