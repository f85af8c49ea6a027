//! CIDEr and CIDEr-D consensus scoring.
//!
//! A caption becomes one TF-IDF vector per n-gram order (term frequency
//! times `ln(num_images / df)`). The score against a reference is the
//! cosine similarity of those vectors averaged over orders; CIDEr-D clips
//! candidate weights at the reference weight and multiplies each order by a
//! Gaussian penalty on the length difference. Scores are averaged over the
//! references and multiplied by `scale`.
//!
//! Reference vectors can be prepared once with [`CiderScorer::prepare`] and
//! reused across many candidates, which is how the reward session reaches
//! its throughput.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::df::DfTable;
use crate::error::{Error, Result};
use crate::ngram::{extract_ngrams, NGram};
use crate::text::TokenSeq;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Variant {
    /// Clipped weights and Gaussian length penalty.
    #[serde(rename = "cider-d")]
    CiderD,
    /// Plain TF-IDF cosine.
    #[serde(rename = "cider")]
    Plain,
}

impl Variant {
    pub fn as_str(self) -> &'static str {
        match self {
            Variant::CiderD => "cider-d",
            Variant::Plain => "cider",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CiderParams {
    pub max_order: usize,
    /// Width of the length penalty (CIDEr-D only).
    pub sigma: f64,
    pub scale: f64,
    pub variant: Variant,
}

impl Default for CiderParams {
    fn default() -> Self {
        CiderParams { max_order: 4, sigma: 6.0, scale: 10.0, variant: Variant::CiderD }
    }
}

impl CiderParams {
    pub fn plain() -> Self {
        CiderParams { variant: Variant::Plain, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_order < 1 {
            return Err(Error::InvalidParams("max_order must be at least 1".into()));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::OutOfRange { name: "sigma", value: self.sigma, expected: "> 0" });
        }
        if !(self.scale > 0.0 && self.scale.is_finite()) {
            return Err(Error::OutOfRange { name: "scale", value: self.scale, expected: "> 0" });
        }
        Ok(())
    }
}

/// Per-order TF-IDF weights of one caption, sorted by n-gram.
#[derive(Clone, Debug, PartialEq)]
pub struct TfIdfVector {
    orders: Vec<Vec<(NGram, f64)>>,
    sq_norms: Vec<f64>,
    length: usize,
}

impl TfIdfVector {
    /// Number of tokens in the caption.
    pub fn length(&self) -> usize {
        self.length
    }

    pub fn norm(&self, order: usize) -> f64 {
        self.sq_norms[order - 1].sqrt()
    }

    pub fn weights(&self, order: usize) -> &[(NGram, f64)] {
        &self.orders[order - 1]
    }
}

/// Scores captions against a fixed document-frequency table.
#[derive(Clone, Copy, Debug)]
pub struct CiderScorer<'a> {
    df: &'a DfTable,
    params: CiderParams,
}

impl<'a> CiderScorer<'a> {
    pub fn new(df: &'a DfTable, params: CiderParams) -> Result<Self> {
        params.validate()?;
        if params.max_order > df.max_order() {
            return Err(Error::InvalidParams(format!(
                "max_order {} exceeds the document-frequency table's order {}",
                params.max_order,
                df.max_order()
            )));
        }
        Ok(CiderScorer { df, params })
    }

    pub fn params(&self) -> &CiderParams {
        &self.params
    }

    pub fn df(&self) -> &'a DfTable {
        self.df
    }

    pub fn prepare(&self, seq: &TokenSeq) -> TfIdfVector {
        let counts = extract_ngrams(seq, self.params.max_order);
        let mut orders = Vec::with_capacity(self.params.max_order);
        let mut sq_norms = Vec::with_capacity(self.params.max_order);
        for order in counts.iter_orders() {
            let mut weights = Vec::with_capacity(order.len());
            let mut sq = 0.0;
            for (gram, &tf) in order {
                let w = f64::from(tf) * self.df.idf(gram.as_str());
                sq += w * w;
                weights.push((gram.clone(), w));
            }
            orders.push(weights);
            sq_norms.push(sq);
        }
        TfIdfVector { orders, sq_norms, length: seq.len() }
    }

    /// Order-averaged similarity in `[0, 1]`, before scaling.
    fn similarity(&self, cand: &TfIdfVector, reference: &TfIdfVector) -> f64 {
        let clipped = self.params.variant == Variant::CiderD;
        let mut total = 0.0;
        for n in 0..self.params.max_order {
            let denom = (cand.sq_norms[n] * reference.sq_norms[n]).sqrt();
            if denom == 0.0 {
                continue;
            }
            let dot = merge_dot(&cand.orders[n], &reference.orders[n], clipped);
            total += (dot / denom).clamp(0.0, 1.0);
        }
        let mut sim = total / self.params.max_order as f64;
        if clipped {
            let delta = cand.length as f64 - reference.length as f64;
            sim *= (-(delta * delta) / (2.0 * self.params.sigma * self.params.sigma)).exp();
        }
        sim
    }

    /// Score of `cand` against a single reference.
    pub fn pair(&self, cand: &TfIdfVector, reference: &TfIdfVector) -> f64 {
        self.params.scale * self.similarity(cand, reference)
    }

    /// Score of `cand` against a reference set (mean over references).
    pub fn score_prepared<'r, I>(&self, cand: &TfIdfVector, references: I) -> Result<f64>
    where
        I: IntoIterator<Item = &'r TfIdfVector>,
    {
        let mut sum = 0.0;
        let mut count = 0usize;
        for r in references {
            sum += self.similarity(cand, r);
            count += 1;
        }
        if count == 0 {
            return Err(Error::NoReferences);
        }
        Ok(self.params.scale * sum / count as f64)
    }

    pub fn score(&self, candidate: &TokenSeq, references: &[TokenSeq]) -> Result<f64> {
        if references.is_empty() {
            return Err(Error::NoReferences);
        }
        let cand = self.prepare(candidate);
        let refs: Vec<TfIdfVector> = references.iter().map(|r| self.prepare(r)).collect();
        self.score_prepared(&cand, &refs)
    }
}

fn merge_dot(cand: &[(NGram, f64)], reference: &[(NGram, f64)], clipped: bool) -> f64 {
    let (mut i, mut j) = (0, 0);
    let mut dot = 0.0;
    while i < cand.len() && j < reference.len() {
        match cand[i].0.cmp(&reference[j].0) {
            Ordering::Less => i += 1,
            Ordering::Greater => j += 1,
            Ordering::Equal => {
                let (c, r) = (cand[i].1, reference[j].1);
                dot += if clipped { c.min(r) * r } else { c * r };
                i += 1;
                j += 1;
            }
        }
    }
    dot
}

/// CIDEr of `candidate` against `references`, in `[0, params.scale]`.
pub fn cider_score(candidate: &TokenSeq, references: &[TokenSeq], df: &DfTable, params: &CiderParams) -> Result<f64> {
    CiderScorer::new(df, *params)?.score(candidate, references)
}
