use std::cmp::Ordering;
use std::collections::HashSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::store::{cosine_with_norms, EmbeddingStore};
use crate::error::{Error, Result};

/// The `K` images closest to a target, best first.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimilarSet {
    pub target_id: String,
    #[serde(rename = "neighbors")]
    pub neighbor_ids: Vec<String>,
    pub scores: Vec<f64>,
}

impl SimilarSet {
    pub fn k(&self) -> usize {
        self.neighbor_ids.len()
    }
}

/// Similarity of image `i` to image `j`: the best cosine between `i`'s image
/// embedding and any caption embedding of `j`.
pub fn image_similarity(store: &EmbeddingStore, i: &str, j: &str) -> Result<f64> {
    let ip = store.image_pos(i)?;
    let jp = store.image_pos(j)?;
    similarity_at(store, ip, jp).ok_or_else(|| Error::NoCaptionEmbeddings(j.to_owned()))
}

fn similarity_at(store: &EmbeddingStore, ip: usize, jp: usize) -> Option<f64> {
    let (iv, inorm) = (store.image_at(ip), store.image_norm(ip));
    store.caption_range(jp).map(|c| cosine_with_norms(iv, inorm, store.caption_at(c), store.caption_norm(c))).max_by(f64::total_cmp)
}

/// Builds the similar-image set of every target by image-to-caption retrieval
/// over the pool.
///
/// For each target the `N' = n * (k + 1)` pool captions closest to its image
/// embedding are retrieved (descending cosine, ties by ascending image id then
/// caption index) and mapped to their images in retrieval order, skipping the
/// target itself and repeats. If fewer than `k` images remain, `N'` doubles
/// until they do. Each neighbor is scored with [`image_similarity`].
pub fn build_similar_sets<T, P>(store: &EmbeddingStore, target_ids: &[T], pool_ids: &[P], k: usize, n: usize) -> Result<Vec<SimilarSet>>
where
    T: AsRef<str> + Sync,
    P: AsRef<str>,
{
    if k == 0 || n == 0 {
        return Err(Error::InvalidParams("k and n must be at least 1".into()));
    }
    let mut pool = Vec::with_capacity(pool_ids.len());
    let mut seen = HashSet::new();
    for id in pool_ids {
        let pos = store.image_pos(id.as_ref())?;
        if store.caption_range(pos).is_empty() {
            return Err(Error::NoCaptionEmbeddings(id.as_ref().to_owned()));
        }
        if seen.insert(pos) {
            pool.push(pos);
        }
    }
    pool.sort_unstable();
    let pool_captions: Vec<usize> = pool.iter().flat_map(|&p| store.caption_range(p)).collect();

    target_ids.par_iter().map(|t| similar_set_for(store, t.as_ref(), &pool, &pool_captions, k, n)).collect()
}

fn similar_set_for(
    store: &EmbeddingStore,
    target: &str,
    pool: &[usize],
    pool_captions: &[usize],
    k: usize,
    n: usize,
) -> Result<SimilarSet> {
    let tp = store.image_pos(target)?;
    let available = pool.len() - usize::from(pool.binary_search(&tp).is_ok());
    if available < k {
        return Err(Error::PoolTooSmall { needed: k, available });
    }
    let (tv, tnorm) = (store.image_at(tp), store.image_norm(tp));
    // Caption positions are already in (image id, caption index) order.
    let mut scored: Vec<(f64, usize)> =
        pool_captions.iter().map(|&c| (cosine_with_norms(tv, tnorm, store.caption_at(c), store.caption_norm(c)), c)).collect();
    let rank = |a: &(f64, usize), b: &(f64, usize)| -> Ordering { b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)) };

    let mut depth = n.saturating_mul(k + 1).min(scored.len());
    loop {
        if depth < scored.len() {
            scored.select_nth_unstable_by(depth, rank);
        }
        scored[..depth].sort_unstable_by(rank);
        let mut neighbors = Vec::with_capacity(k);
        for &(_, c) in &scored[..depth] {
            let img = store.caption_entry(c).image;
            if img != tp && !neighbors.contains(&img) {
                neighbors.push(img);
                if neighbors.len() == k {
                    break;
                }
            }
        }
        if neighbors.len() == k {
            let scores = neighbors.iter().map(|&j| similarity_at(store, tp, j).expect("pool images have captions")).collect();
            return Ok(SimilarSet {
                target_id: target.to_owned(),
                neighbor_ids: neighbors.iter().map(|&j| store.image_ids()[j].clone()).collect(),
                scores,
            });
        }
        // `available >= k` guarantees success once every caption is ranked.
        debug_assert!(depth < scored.len());
        depth = depth.saturating_mul(2).min(scored.len());
    }
}
