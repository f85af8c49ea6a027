//! Corpus document frequencies, the IDF side of CIDEr.

use std::collections::{BTreeSet, HashMap};

use rayon::prelude::*;

use crate::cider::CiderParams;
use crate::corpus::ImageRecord;
use crate::error::{Error, Result};
use crate::ngram::{extract_ngrams, NGram};
use crate::text::{normalize_text, TokenSeq};

/// Number of images whose reference set contains each n-gram at least once.
#[derive(Clone, Debug, PartialEq)]
pub struct DfTable {
    counts: HashMap<NGram, u32>,
    max_order: usize,
    num_images: usize,
    split_tag: String,
}

impl DfTable {
    /// Builds the table from already-normalized reference sets, one per image.
    pub fn from_reference_sets<I, R>(images: I, max_order: usize, split_tag: impl Into<String>) -> Result<Self>
    where
        I: IntoParallelIterator<Item = R>,
        R: AsRef<[TokenSeq]>,
    {
        let (counts, num_images) = images
            .into_par_iter()
            .map(|refs| {
                let mut seen = BTreeSet::new();
                for r in refs.as_ref() {
                    let grams = extract_ngrams(r, max_order);
                    for order in grams.iter_orders() {
                        seen.extend(order.keys().cloned());
                    }
                }
                seen
            })
            .fold(
                || (HashMap::new(), 0usize),
                |(mut acc, n), seen| {
                    for g in seen {
                        *acc.entry(g).or_insert(0u32) += 1;
                    }
                    (acc, n + 1)
                },
            )
            .reduce(
                || (HashMap::new(), 0usize),
                |(mut a, na), (b, nb)| {
                    for (g, c) in b {
                        *a.entry(g).or_insert(0) += c;
                    }
                    (a, na + nb)
                },
            );
        if num_images == 0 {
            return Err(Error::EmptyCorpus);
        }
        Ok(DfTable { counts, max_order, num_images, split_tag: split_tag.into() })
    }

    /// Stored document frequency, 0 for n-grams never seen in the corpus.
    pub fn df(&self, gram: &str) -> u32 {
        self.counts.get(gram).copied().unwrap_or(0)
    }

    /// `ln(num_images / df)` with unseen n-grams treated as `df = 1`.
    pub fn idf(&self, gram: &str) -> f64 {
        let df = self.df(gram).max(1);
        (self.num_images as f64 / f64::from(df)).ln()
    }

    pub fn num_images(&self) -> usize {
        self.num_images
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    pub fn split_tag(&self) -> &str {
        &self.split_tag
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&NGram, u32)> {
        self.counts.iter().map(|(g, &c)| (g, c))
    }
}

/// Document frequencies over the reference captions of `references`.
///
/// The split tag is the records' common split, or `"mixed"`.
pub fn build_df(references: &[ImageRecord], params: &CiderParams) -> Result<DfTable> {
    if references.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    if let Some(bad) = references.iter().find(|r| r.captions.is_empty()) {
        return Err(Error::EmptyCaptions(bad.id.clone()));
    }
    let first = references[0].split;
    let tag = if references.iter().all(|r| r.split == first) { first.as_str().to_owned() } else { "mixed".to_owned() };
    let sets: Vec<Vec<TokenSeq>> = references.par_iter().map(|r| r.captions.iter().map(|c| normalize_text(c)).collect()).collect();
    DfTable::from_reference_sets(&sets, params.max_order, tag)
}
