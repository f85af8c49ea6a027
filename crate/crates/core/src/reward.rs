//! Streaming reward protocol for external RL training loops.
//!
//! Requests arrive one JSON object per line:
//!
//! ```text
//! {"seq": 7, "image_id": "123", "candidate": "a dog catching a frisbee"}
//! ```
//!
//! and each gets exactly one response line, in request order:
//!
//! ```text
//! {"seq":7,"reward":4.1,"r_tilde":5.3,"ciderbtw":3.0,"cider":4.9}
//! {"seq":8,"error":"unknown id `999`"}
//! ```
//!
//! `seq` is optional; without it the 0-based position of the request in the
//! stream is echoed. Bad lines get an error object and the session goes on.

use std::collections::HashMap;
use std::io::{BufRead, Write};
use std::sync::mpsc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cider::{CiderParams, TfIdfVector};
use crate::corpus::{Dataset, Split};
use crate::distinct::{ciderbtw_prepared, weighted_reward_prepared, RewardBreakdown, RewardParams, WeightTable};
use crate::error::{Error, Result};
use crate::pipeline::PreparedCorpus;
use crate::retrieval::SimilarSet;
use crate::text::normalize_text;

const MAX_BATCH: usize = 512;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RewardRequest {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seq: Option<u64>,
    pub image_id: String,
    pub candidate: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RewardResponse {
    Ok { seq: u64, reward: f64, r_tilde: f64, ciderbtw: f64, cider: f64 },
    Err { seq: u64, error: String },
}

impl RewardResponse {
    pub fn seq(&self) -> u64 {
        match self {
            RewardResponse::Ok { seq, .. } | RewardResponse::Err { seq, .. } => *seq,
        }
    }
}

/// Reward components of a candidate caption, including plain CIDEr against
/// all ground truths.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RewardScores {
    pub breakdown: RewardBreakdown,
    pub cider: f64,
}

struct ImageContext {
    weights: Vec<f64>,
    neighbors: Vec<String>,
}

/// Precomputed state for scoring candidates of one split.
pub struct RewardService {
    corpus: PreparedCorpus,
    images: HashMap<String, ImageContext>,
    params: RewardParams,
}

impl RewardService {
    /// Prepares TF-IDF vectors for every ground truth (IDF from `split`).
    /// Images of `split` without a similar set or weights are answered with
    /// errors at request time.
    pub fn new(
        dataset: &Dataset,
        sets: &[SimilarSet],
        weights: &WeightTable,
        split: Split,
        cparams: CiderParams,
        rparams: RewardParams,
    ) -> Result<Self> {
        rparams.validate()?;
        let corpus = PreparedCorpus::new(dataset, split, cparams)?;
        let by_target: HashMap<&str, &SimilarSet> = sets.iter().map(|s| (s.target_id.as_str(), s)).collect();
        let mut images = HashMap::new();
        for img in dataset.split(split) {
            let (Some(set), Some(w)) = (by_target.get(img.id.as_str()), weights.weights_of(&img.id)) else {
                continue;
            };
            if w.len() != img.captions.len() {
                return Err(Error::LengthMismatch { expected: img.captions.len(), found: w.len() });
            }
            for n in &set.neighbor_ids {
                corpus.references(n)?;
            }
            images.insert(img.id.clone(), ImageContext { weights: w, neighbors: set.neighbor_ids.clone() });
        }
        Ok(RewardService { corpus, images, params: rparams })
    }

    pub fn num_images(&self) -> usize {
        self.images.len()
    }

    pub fn score(&self, image_id: &str, candidate: &str) -> Result<RewardScores> {
        let ctx = self.images.get(image_id).ok_or_else(|| {
            if self.corpus.references(image_id).is_err() {
                Error::UnknownId(image_id.to_owned())
            } else {
                Error::MissingWeights(image_id.to_owned())
            }
        })?;
        let scorer = self.corpus.scorer();
        let cand = scorer.prepare(&normalize_text(candidate));
        let gts = self.corpus.references(image_id)?;
        let r_tilde = weighted_reward_prepared(&scorer, &cand, gts, &ctx.weights)?;
        let similar: Vec<&[TfIdfVector]> = ctx.neighbors.iter().map(|n| self.corpus.references(n)).collect::<Result<_>>()?;
        let btw = ciderbtw_prepared(&scorer, &cand, similar)?;
        let cider = scorer.score_prepared(&cand, gts)?;
        Ok(RewardScores { breakdown: RewardBreakdown::new(r_tilde, btw, self.params.alpha_r), cider })
    }

    /// Answers one request line; `position` is its index in the stream.
    pub fn respond(&self, position: u64, line: &str) -> RewardResponse {
        let req: RewardRequest = match serde_json::from_str(line) {
            Ok(r) => r,
            Err(e) => return RewardResponse::Err { seq: position, error: format!("malformed request: {e}") },
        };
        let seq = req.seq.unwrap_or(position);
        match self.score(&req.image_id, &req.candidate) {
            Ok(s) => RewardResponse::Ok {
                seq,
                reward: s.breakdown.reward,
                r_tilde: s.breakdown.r_tilde,
                ciderbtw: s.breakdown.ciderbtw,
                cider: s.cider,
            },
            Err(e) => RewardResponse::Err { seq, error: e.to_string() },
        }
    }

    /// Runs a session until end of input, returning the number of requests.
    ///
    /// A reader thread feeds lines to the scorer; whatever has arrived is
    /// scored as one parallel batch and written back in order, then flushed,
    /// so a client waiting on each response never stalls.
    pub fn serve<R, W>(&self, reader: R, mut writer: W) -> Result<u64>
    where
        R: BufRead + Send,
        W: Write,
    {
        let (tx, rx) = mpsc::sync_channel::<std::io::Result<String>>(4 * MAX_BATCH);
        std::thread::scope(|scope| {
            // Owned here so an early return disconnects the reader.
            let rx = rx;
            scope.spawn(move || {
                for line in reader.lines() {
                    let stop = line.is_err();
                    if tx.send(line).is_err() || stop {
                        break;
                    }
                }
            });
            let mut position = 0u64;
            let mut batch: Vec<(u64, String)> = Vec::with_capacity(MAX_BATCH);
            let mut read_error = None;
            while let Ok(first) = rx.recv() {
                let mut next = Some(first);
                while let Some(item) = next.take() {
                    match item {
                        Ok(line) if line.trim().is_empty() => {}
                        Ok(line) => {
                            batch.push((position, line));
                            position += 1;
                        }
                        Err(e) => {
                            read_error = Some(e);
                            break;
                        }
                    }
                    if batch.len() < MAX_BATCH {
                        next = rx.try_recv().ok();
                    }
                }
                let responses: Vec<RewardResponse> = batch.par_iter().map(|(pos, line)| self.respond(*pos, line)).collect();
                for r in &responses {
                    serde_json::to_writer(&mut writer, r).map_err(std::io::Error::from)?;
                    writer.write_all(b"\n")?;
                }
                writer.flush()?;
                batch.clear();
                if read_error.is_some() {
                    break;
                }
            }
            match read_error {
                Some(e) => Err(Error::Io(e)),
                None => Ok(position),
            }
        })
    }
}
