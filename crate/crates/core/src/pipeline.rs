//! Corpus-level commands: similar sets, weight tables and evaluation.
//!
//! Each function here backs one subcommand of the `ciderbtw` binary. They
//! parallelize per image and collect in input order, so output does not
//! depend on the thread count.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;

use crate::cider::{CiderParams, CiderScorer, TfIdfVector};
use crate::corpus::{
    CandidateSet, Dataset, EvalReport, ImageRecord, ImageRow, ReportMeta, Split, SystemReport, WeightFileMeta, WEIGHT_FORMAT,
};
use crate::df::DfTable;
use crate::distinct::{ciderbtw_prepared, compute_weights_prepared, WeightParams, WeightTable};
use crate::error::{Error, Result};
use crate::retrieval::{build_similar_sets, recall_at_k, EmbeddingStore, RecallQuery, SimilarSet};
use crate::text::normalize_text;

/// A document-frequency table plus TF-IDF vectors of every ground-truth
/// caption in a dataset, prepared once and shared by all scoring.
#[derive(Debug)]
pub struct PreparedCorpus {
    df: DfTable,
    params: CiderParams,
    refs: HashMap<String, Vec<TfIdfVector>>,
}

impl PreparedCorpus {
    /// `df_split` selects the images whose captions form the IDF corpus;
    /// vectors are prepared for every image of the dataset.
    pub fn new(dataset: &Dataset, df_split: Split, params: CiderParams) -> Result<Self> {
        let df_images: Vec<ImageRecord> = dataset.split(df_split).into_iter().cloned().collect();
        let df = crate::df::build_df(&df_images, &params)?;
        let scorer = CiderScorer::new(&df, params)?;
        let refs = dataset
            .images()
            .par_iter()
            .map(|img| {
                let vecs = img.captions.iter().map(|c| scorer.prepare(&normalize_text(c))).collect();
                (img.id.clone(), vecs)
            })
            .collect();
        Ok(PreparedCorpus { df, params, refs })
    }

    pub fn df(&self) -> &DfTable {
        &self.df
    }

    pub fn params(&self) -> &CiderParams {
        &self.params
    }

    pub fn scorer(&self) -> CiderScorer<'_> {
        CiderScorer::new(&self.df, self.params).expect("validated at construction")
    }

    pub fn references(&self, id: &str) -> Result<&[TfIdfVector]> {
        self.refs.get(id).map(Vec::as_slice).ok_or_else(|| Error::UnknownId(id.to_owned()))
    }

    /// Ground-truth vectors of each neighbor in `set`.
    pub fn similar_refs(&self, set: &SimilarSet) -> Result<Vec<&[TfIdfVector]>> {
        set.neighbor_ids.iter().map(|n| self.references(n)).collect()
    }
}

/// Similar-image sets for every image of `split`, retrieved within the split.
///
/// `N` in `N' = N(K+1)` is the largest caption count of any split image.
pub fn build_sets(dataset: &Dataset, store: &EmbeddingStore, split: Split, k: usize) -> Result<Vec<SimilarSet>> {
    let images = dataset.split(split);
    for img in &images {
        if !store.contains_image(&img.id) {
            return Err(Error::MissingEmbedding(img.id.clone()));
        }
        for i in 0..img.captions.len() {
            if store.caption_vector(&img.id, i as u32).is_none() {
                return Err(Error::MissingEmbedding(format!("{}#{i}", img.id)));
            }
        }
    }
    let ids: Vec<&str> = images.iter().map(|r| r.id.as_str()).collect();
    let n = ids.iter().map(|id| store.num_captions_of(id)).max().unwrap_or(1).max(1);
    build_similar_sets(store, &ids, &ids, k, n)
}

fn index_sets(sets: &[SimilarSet]) -> HashMap<&str, &SimilarSet> {
    sets.iter().map(|s| (s.target_id.as_str(), s)).collect()
}

/// Ground-truth weights of every image in `split`, scored against its
/// similar set with IDF from `df_split`.
pub fn build_weight_table(
    dataset: &Dataset,
    sets: &[SimilarSet],
    split: Split,
    df_split: Split,
    wparams: WeightParams,
    cparams: CiderParams,
) -> Result<(WeightFileMeta, WeightTable)> {
    wparams.validate()?;
    let corpus = PreparedCorpus::new(dataset, df_split, cparams)?;
    let scorer = corpus.scorer();
    let by_target = index_sets(sets);
    let images = dataset.split(split);
    let rows = images
        .par_iter()
        .map(|img| {
            let set = by_target.get(img.id.as_str()).ok_or_else(|| Error::MissingSimilarSet(img.id.clone()))?;
            let similar = corpus.similar_refs(set)?;
            let entries = compute_weights_prepared(&scorer, corpus.references(&img.id)?, &similar, &wparams)?;
            Ok((img.id.clone(), entries))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut table = WeightTable::new(wparams);
    for (id, entries) in rows {
        table.insert(id, entries)?;
    }
    let meta = WeightFileMeta {
        format: WEIGHT_FORMAT.into(),
        lambda_w: wparams.lambda_w,
        alpha_w: wparams.alpha_w,
        df_split: df_split.as_str().into(),
        variant: cparams.variant,
        sigma: cparams.sigma,
    };
    Ok((meta, table))
}

#[derive(Clone, Debug)]
pub struct EvalOptions {
    pub split: Split,
    pub ks: Vec<usize>,
    pub cider: CiderParams,
    pub timestamp: Option<String>,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions { split: Split::Test, ks: vec![1, 5, 10], cider: CiderParams::default(), timestamp: None }
    }
}

/// Evaluation result plus non-fatal warnings (skipped recall).
#[derive(Clone, Debug)]
pub struct Evaluation {
    pub report: EvalReport,
    pub warnings: Vec<String>,
}

/// Scores every system's candidates on the images of `opts.split`: CIDEr
/// against the image's own ground truths, CIDErBtw against its similar set
/// (IDF from the same split), and recall@k when `store` holds a query
/// embedding for every candidate.
pub fn evaluate(
    dataset: &Dataset,
    store: Option<&EmbeddingStore>,
    sets: &[SimilarSet],
    candidates: &[CandidateSet],
    opts: &EvalOptions,
) -> Result<Evaluation> {
    let images = dataset.split(opts.split);
    let Some(first) = images.first() else {
        return Err(Error::InvalidParams(format!("split `{}` has no images", opts.split)));
    };
    if candidates.is_empty() {
        return Err(Error::MissingCandidate { system: crate::corpus::DEFAULT_SYSTEM.into(), image_id: first.id.clone() });
    }
    for set in candidates {
        if let Some(id) = set.captions.keys().filter(|id| dataset.get(id).map(|r| r.split) != Some(opts.split)).min() {
            return Err(Error::UnknownId(format!("{id} (candidate of `{}` outside split {})", set.system, opts.split)));
        }
    }
    let corpus = PreparedCorpus::new(dataset, opts.split, opts.cider)?;
    let scorer = corpus.scorer();
    let by_target = index_sets(sets);
    let mut warnings = Vec::new();

    let gallery = match store {
        Some(s) => Some(s.restrict_to(&images.iter().map(|r| r.id.as_str()).collect::<Vec<_>>())?),
        None => {
            warnings.push("no embeddings supplied; recall@k skipped".to_owned());
            None
        }
    };

    let mut systems = Vec::with_capacity(candidates.len());
    for set in candidates {
        let rows = images
            .par_iter()
            .map(|img| {
                let caption = set
                    .captions
                    .get(&img.id)
                    .ok_or_else(|| Error::MissingCandidate { system: set.system.clone(), image_id: img.id.clone() })?;
                let similar = by_target.get(img.id.as_str()).ok_or_else(|| Error::MissingSimilarSet(img.id.clone()))?;
                let cand = scorer.prepare(&normalize_text(caption));
                let cider = scorer.score_prepared(&cand, corpus.references(&img.id)?)?;
                let similar_refs = corpus.similar_refs(similar)?;
                let btw_pairs = similar_refs.iter().map(|r| r.len()).sum();
                let ciderbtw = ciderbtw_prepared(&scorer, &cand, similar_refs)?;
                Ok(ImageRow { image_id: img.id.clone(), caption: caption.clone(), cider, ciderbtw, btw_pairs })
            })
            .collect::<Result<Vec<_>>>()?;

        let recall = match &gallery {
            Some(g) => {
                let queries: Option<Vec<RecallQuery>> = images
                    .iter()
                    .map(|img| {
                        g.query_vector(Some(&set.system), &img.id).map(|v| RecallQuery {
                            id: img.id.clone(),
                            vector: v.to_vec(),
                            true_image: img.id.clone(),
                        })
                    })
                    .collect();
                match queries {
                    Some(q) => Some(recall_at_k(g, &q, &opts.ks)?),
                    None => {
                        warnings.push(format!("system `{}`: missing candidate embeddings; recall@k skipped", set.system));
                        None
                    }
                }
            }
            None => None,
        };
        systems.push(SystemReport { name: set.system.clone(), rows, recall });
    }

    let k = images.iter().filter_map(|img| by_target.get(img.id.as_str())).map(|s| s.k()).max().unwrap_or(0);
    let n0 = first.captions.len();
    let n = images.iter().all(|r| r.captions.len() == n0).then_some(n0);
    Ok(Evaluation {
        report: EvalReport {
            meta: ReportMeta { k, n, split: opts.split, cider: opts.cider, ks: opts.ks.clone(), timestamp: opts.timestamp.clone() },
            systems,
        },
        warnings,
    })
}

/// Per-image CIDErBtw of every ground-truth caption, useful for inspecting
/// which references a weight table favours.
pub fn ground_truth_scores(corpus: &PreparedCorpus, set: &SimilarSet, image_id: &str) -> Result<BTreeMap<usize, f64>> {
    let scorer = corpus.scorer();
    let similar = corpus.similar_refs(set)?;
    corpus
        .references(image_id)?
        .iter()
        .enumerate()
        .map(|(i, gt)| Ok((i, ciderbtw_prepared(&scorer, gt, similar.iter().copied())?)))
        .collect()
}
