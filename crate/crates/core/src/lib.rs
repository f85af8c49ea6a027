//! Metrics for distinctive image captioning.
//!
//! The crate scores captions with CIDEr / CIDEr-D, measures how much a
//! caption overlaps with the ground truths of semantically similar images
//! (between-set CIDEr, "CIDErBtw"), builds those similar-image sets from
//! precomputed joint-space embeddings, and turns CIDErBtw into per-caption
//! training weights and RL rewards.
//!
//! | module | contents |
//! |---|---|
//! | [`text`], [`ngram`], [`df`], [`cider`] | tokenization, n-gram counts, document frequencies, CIDEr |
//! | [`retrieval`] | embedding store, similar-image sets, recall@K |
//! | [`distinct`] | CIDErBtw, ground-truth weights, weighted XE, rewards |
//! | [`corpus`] | dataset / embedding / table files and evaluation reports |
//! | [`pipeline`], [`reward`] | corpus-level commands and the stdio reward session |
//! | [`fixture`] | seeded synthetic corpora |
//!
//! ```
//! use ciderbtw::{cider_score, normalize_text, CiderParams, DfTable};
//!
//! let corpus = vec![
//!     vec![normalize_text("a red car on a road")],
//!     vec![normalize_text("a blue bird on a tree")],
//!     vec![normalize_text("a man with a dog")],
//! ];
//! let df = DfTable::from_reference_sets(&corpus, 4, "demo")?;
//! let score = cider_score(&normalize_text("a red car"), &corpus[0], &df, &CiderParams::default())?;
//! assert!((score - 4.399103160751068).abs() < 1e-9);
//! # Ok::<(), ciderbtw::Error>(())
//! ```

pub mod cider;
pub mod corpus;
pub mod df;
pub mod distinct;
mod error;
pub mod fixture;
pub mod ngram;
pub mod pipeline;
pub mod retrieval;
pub mod reward;
pub mod text;

pub use cider::{cider_score, CiderParams, CiderScorer, TfIdfVector, Variant};
pub use df::{build_df, DfTable};
pub use distinct::{
    ciderbtw, combine_losses, combined_reward, compute_weights, weighted_reward, weighted_xe, weights_from_scores, RewardBreakdown,
    RewardParams, WeightEntry, WeightParams, WeightTable,
};
pub use error::{Error, Result};
pub use ngram::{extract_ngrams, NGram, NGramCounts};
pub use text::{normalize_text, TokenSeq};
