//! Contiguous n-gram counting.

use std::borrow::Borrow;
use std::collections::BTreeMap;
use std::fmt;

use crate::text::TokenSeq;

/// An n-gram stored as its tokens joined by single spaces. Tokens never
/// contain whitespace, so the join is unambiguous and the order is the
/// number of separators plus one.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NGram(Box<str>);

impl NGram {
    pub fn from_tokens<S: AsRef<str>>(tokens: &[S]) -> Self {
        let mut s = String::new();
        for (i, t) in tokens.iter().enumerate() {
            if i > 0 {
                s.push(' ');
            }
            s.push_str(t.as_ref());
        }
        NGram(s.into_boxed_str())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn order(&self) -> usize {
        self.0.bytes().filter(|&b| b == b' ').count() + 1
    }
}

impl Borrow<str> for NGram {
    fn borrow(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for NGram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// N-gram occurrence counts for orders `1..=max_order`. Only strictly
/// positive counts are stored.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct NGramCounts {
    orders: Vec<BTreeMap<NGram, u32>>,
}

impl NGramCounts {
    pub fn max_order(&self) -> usize {
        self.orders.len()
    }

    /// Counts at order `n` (1-based). Panics if `n` is 0 or above `max_order`.
    pub fn order(&self, n: usize) -> &BTreeMap<NGram, u32> {
        &self.orders[n - 1]
    }

    pub fn get(&self, gram: &str) -> u32 {
        let n = gram.bytes().filter(|&b| b == b' ').count() + 1;
        self.orders.get(n - 1).and_then(|m| m.get(gram)).copied().unwrap_or(0)
    }

    /// Sum of counts at order `n`.
    pub fn total(&self, n: usize) -> u64 {
        self.order(n).values().map(|&c| u64::from(c)).sum()
    }

    pub fn iter_orders(&self) -> impl Iterator<Item = &BTreeMap<NGram, u32>> {
        self.orders.iter()
    }
}

pub fn extract_ngrams(seq: &TokenSeq, max_order: usize) -> NGramCounts {
    let tokens = seq.tokens();
    let orders = (1..=max_order)
        .map(|n| {
            let mut counts = BTreeMap::new();
            for window in tokens.windows(n) {
                *counts.entry(NGram::from_tokens(window)).or_insert(0) += 1;
            }
            counts
        })
        .collect();
    NGramCounts { orders }
}
