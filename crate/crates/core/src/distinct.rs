//! Between-set CIDEr and the training signals derived from it.
//!
//! * [`ciderbtw`]: mean single-reference CIDEr of a caption against every
//!   ground truth of its image's similar set. Lower means more distinctive.
//! * [`compute_weights`]: per-ground-truth weights
//!   `w_i = lambda_w - alpha_w * v_i / max_j v_j`, with `v_i` the CIDErBtw of
//!   ground truth `i`.
//! * [`weighted_xe`], [`weighted_reward`], [`combined_reward`] and
//!   [`combine_losses`]: the weighted cross-entropy loss, the reweighted
//!   CIDEr reward, the reward with the CIDErBtw penalty, and the XE/RL mix.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::cider::{CiderParams, CiderScorer, TfIdfVector};
use crate::df::DfTable;
use crate::error::{Error, Result};
use crate::text::TokenSeq;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightParams {
    pub lambda_w: f64,
    pub alpha_w: f64,
}

impl Default for WeightParams {
    fn default() -> Self {
        WeightParams { lambda_w: 1.5, alpha_w: 0.5 }
    }
}

impl WeightParams {
    pub fn new(lambda_w: f64, alpha_w: f64) -> Result<Self> {
        let p = WeightParams { lambda_w, alpha_w };
        p.validate()?;
        Ok(p)
    }

    /// `lambda_w > 0` and `0 <= alpha_w <= lambda_w`, so weights stay non-negative.
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda_w > 0.0 && self.lambda_w.is_finite()) {
            return Err(Error::OutOfRange { name: "lambda_w", value: self.lambda_w, expected: "> 0" });
        }
        if !(0.0..=self.lambda_w).contains(&self.alpha_w) {
            return Err(Error::OutOfRange { name: "alpha_w", value: self.alpha_w, expected: "0 <= alpha_w <= lambda_w" });
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RewardParams {
    /// Weight of the CIDErBtw penalty in the RL reward.
    pub alpha_r: f64,
    /// Share of the XE loss in the combined objective.
    pub alpha_l: f64,
}

impl Default for RewardParams {
    fn default() -> Self {
        RewardParams { alpha_r: 0.4, alpha_l: 0.0 }
    }
}

impl RewardParams {
    pub fn new(alpha_r: f64, alpha_l: f64) -> Result<Self> {
        let p = RewardParams { alpha_r, alpha_l };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha_r >= 0.0 && self.alpha_r.is_finite()) {
            return Err(Error::OutOfRange { name: "alpha_r", value: self.alpha_r, expected: ">= 0" });
        }
        check_unit("alpha_l", self.alpha_l)
    }
}

fn check_unit(name: &'static str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::OutOfRange { name, value, expected: "[0, 1]" })
    }
}

/// CIDErBtw score `v` and training weight `w` of one ground-truth caption.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightEntry {
    pub caption_index: usize,
    pub v: f64,
    pub w: f64,
}

/// Per-image ground-truth weights, keyed by image id.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct WeightTable {
    pub params: WeightParams,
    entries: BTreeMap<String, Vec<WeightEntry>>,
}

impl WeightTable {
    pub fn new(params: WeightParams) -> Self {
        WeightTable { params, entries: BTreeMap::new() }
    }

    pub fn insert(&mut self, image_id: impl Into<String>, entries: Vec<WeightEntry>) -> Result<()> {
        let id = image_id.into();
        if self.entries.contains_key(&id) {
            return Err(Error::DuplicateId(id));
        }
        self.entries.insert(id, entries);
        Ok(())
    }

    pub fn get(&self, image_id: &str) -> Option<&[WeightEntry]> {
        self.entries.get(image_id).map(Vec::as_slice)
    }

    /// Weights of an image ordered by caption index.
    pub fn weights_of(&self, image_id: &str) -> Option<Vec<f64>> {
        let mut entries = self.entries.get(image_id)?.clone();
        entries.sort_by_key(|e| e.caption_index);
        Some(entries.iter().map(|e| e.w).collect())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[WeightEntry])> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_slice()))
    }
}

/// CIDErBtw from prepared vectors: mean pair score over every reference of
/// every similar image.
pub fn ciderbtw_prepared<'r, I>(scorer: &CiderScorer<'_>, candidate: &TfIdfVector, similar_refs: I) -> Result<f64>
where
    I: IntoIterator<Item = &'r [TfIdfVector]>,
{
    let mut sum = 0.0;
    let mut pairs = 0usize;
    for image in similar_refs {
        for r in image {
            sum += scorer.pair(candidate, r);
            pairs += 1;
        }
    }
    if pairs == 0 {
        return Err(Error::EmptySimilarSet);
    }
    Ok(sum / pairs as f64)
}

/// CIDErBtw of `c` against the ground truths of its similar images,
/// grouped one `Vec` per image.
pub fn ciderbtw(c: &TokenSeq, similar_refs: &[Vec<TokenSeq>], df: &DfTable, params: &CiderParams) -> Result<f64> {
    let scorer = CiderScorer::new(df, *params)?;
    let prepared: Vec<Vec<TfIdfVector>> = similar_refs.iter().map(|img| img.iter().map(|r| scorer.prepare(r)).collect()).collect();
    ciderbtw_prepared(&scorer, &scorer.prepare(c), prepared.iter().map(Vec::as_slice))
}

/// Turns CIDErBtw scores into weights. The maximum is taken over this
/// image's captions; when it is zero every weight is `lambda_w`.
pub fn weights_from_scores(v: &[f64], params: &WeightParams) -> Vec<f64> {
    let max = v.iter().copied().fold(0.0, f64::max);
    if max <= 0.0 {
        return vec![params.lambda_w; v.len()];
    }
    v.iter().map(|&vi| params.lambda_w - params.alpha_w * (vi / max)).collect()
}

pub fn compute_weights(
    gt_captions: &[TokenSeq],
    similar_refs: &[Vec<TokenSeq>],
    df: &DfTable,
    wparams: &WeightParams,
    cparams: &CiderParams,
) -> Result<Vec<WeightEntry>> {
    wparams.validate()?;
    let scorer = CiderScorer::new(df, *cparams)?;
    let prepared: Vec<Vec<TfIdfVector>> = similar_refs.iter().map(|img| img.iter().map(|r| scorer.prepare(r)).collect()).collect();
    let similar: Vec<&[TfIdfVector]> = prepared.iter().map(Vec::as_slice).collect();
    let gts: Vec<TfIdfVector> = gt_captions.iter().map(|c| scorer.prepare(c)).collect();
    compute_weights_prepared(&scorer, &gts, &similar, wparams)
}

pub fn compute_weights_prepared(
    scorer: &CiderScorer<'_>,
    gt_captions: &[TfIdfVector],
    similar_refs: &[&[TfIdfVector]],
    wparams: &WeightParams,
) -> Result<Vec<WeightEntry>> {
    if gt_captions.is_empty() {
        return Err(Error::NoReferences);
    }
    let v = gt_captions.iter().map(|gt| ciderbtw_prepared(scorer, gt, similar_refs.iter().copied())).collect::<Result<Vec<f64>>>()?;
    let w = weights_from_scores(&v, wparams);
    Ok(v.into_iter().zip(w).enumerate().map(|(caption_index, (v, w))| WeightEntry { caption_index, v, w }).collect())
}

/// `sum_i w_i * nll_i`.
pub fn weighted_xe(per_caption_nll: &[f64], weights: &[f64]) -> Result<f64> {
    if per_caption_nll.len() != weights.len() {
        return Err(Error::LengthMismatch { expected: per_caption_nll.len(), found: weights.len() });
    }
    Ok(per_caption_nll.iter().zip(weights).map(|(l, w)| l * w).sum())
}

pub fn weighted_reward_prepared(
    scorer: &CiderScorer<'_>,
    candidate: &TfIdfVector,
    gt_captions: &[TfIdfVector],
    weights: &[f64],
) -> Result<f64> {
    if gt_captions.is_empty() {
        return Err(Error::NoReferences);
    }
    if gt_captions.len() != weights.len() {
        return Err(Error::LengthMismatch { expected: gt_captions.len(), found: weights.len() });
    }
    let sum: f64 = gt_captions.iter().zip(weights).map(|(gt, w)| w * scorer.pair(candidate, gt)).sum();
    Ok(sum / gt_captions.len() as f64)
}

/// `(1/N) sum_i w_i * cider(candidate, gt_i)`; weights are not renormalized.
pub fn weighted_reward(
    candidate: &TokenSeq,
    gt_captions: &[TokenSeq],
    weights: &[f64],
    df: &DfTable,
    cparams: &CiderParams,
) -> Result<f64> {
    let scorer = CiderScorer::new(df, *cparams)?;
    let gts: Vec<TfIdfVector> = gt_captions.iter().map(|c| scorer.prepare(c)).collect();
    weighted_reward_prepared(&scorer, &scorer.prepare(candidate), &gts, weights)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RewardBreakdown {
    pub reward: f64,
    pub r_tilde: f64,
    pub ciderbtw: f64,
}

impl RewardBreakdown {
    pub fn new(r_tilde: f64, ciderbtw: f64, alpha_r: f64) -> Self {
        RewardBreakdown { reward: r_tilde - alpha_r * ciderbtw, r_tilde, ciderbtw }
    }
}

/// Reweighted reward minus `alpha_r` times the candidate's CIDErBtw.
pub fn combined_reward(
    candidate: &TokenSeq,
    gt_captions: &[TokenSeq],
    weights: &[f64],
    similar_refs: &[Vec<TokenSeq>],
    df: &DfTable,
    cparams: &CiderParams,
    rparams: &RewardParams,
) -> Result<RewardBreakdown> {
    rparams.validate()?;
    let r_tilde = weighted_reward(candidate, gt_captions, weights, df, cparams)?;
    let btw = ciderbtw(candidate, similar_refs, df, cparams)?;
    Ok(RewardBreakdown::new(r_tilde, btw, rparams.alpha_r))
}

/// `alpha_l * l_xe + (1 - alpha_l) * l_rl`.
pub fn combine_losses(l_xe: f64, l_rl: f64, alpha_l: f64) -> Result<f64> {
    check_unit("alpha_l", alpha_l)?;
    Ok(alpha_l * l_xe + (1.0 - alpha_l) * l_rl)
}
