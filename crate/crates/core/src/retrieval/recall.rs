use std::collections::BTreeMap;

use rayon::prelude::*;

use super::store::{cosine_with_norms, norm, EmbeddingStore};
use crate::error::{Error, Result};

/// A caption-to-image retrieval query.
#[derive(Clone, Debug, PartialEq)]
pub struct RecallQuery {
    pub id: String,
    pub vector: Vec<f32>,
    pub true_image: String,
}

/// 0-based rank of the true image when the gallery is sorted by descending
/// cosine, ties broken by ascending image id.
pub fn rank_of_true_image(store: &EmbeddingStore, query: &RecallQuery) -> Result<usize> {
    if query.vector.len() != store.dimension() {
        return Err(Error::DimensionMismatch { line: None, expected: store.dimension(), found: query.vector.len() });
    }
    let truth = store.image_pos(&query.true_image)?;
    let qn = norm(&query.vector);
    let score = |p: usize| cosine_with_norms(&query.vector, qn, store.image_at(p), store.image_norm(p));
    let target = score(truth);
    // Image positions follow ascending id, so `p < truth` is the id tie-break.
    Ok((0..store.num_images())
        .filter(|&p| p != truth)
        .filter(|&p| {
            let s = score(p);
            s > target || (s == target && p < truth)
        })
        .count())
}

/// Percentage of queries whose true image is among the top `k` gallery
/// images, for each `k`. The gallery is every image embedding in `store`.
pub fn recall_at_k(store: &EmbeddingStore, queries: &[RecallQuery], ks: &[usize]) -> Result<BTreeMap<usize, f64>> {
    if ks.is_empty() || ks.contains(&0) {
        return Err(Error::InvalidParams("ks must be non-empty and positive".into()));
    }
    if queries.is_empty() {
        return Err(Error::InvalidParams("recall needs at least one query".into()));
    }
    let ranks: Vec<usize> = queries.par_iter().map(|q| rank_of_true_image(store, q)).collect::<Result<_>>()?;
    Ok(ks
        .iter()
        .map(|&k| {
            let hits = ranks.iter().filter(|&&r| r < k).count();
            (k, 100.0 * hits as f64 / queries.len() as f64)
        })
        .collect())
}
