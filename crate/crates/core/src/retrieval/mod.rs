//! Joint-space embeddings, similar-image sets and recall@K.

mod recall;
mod similar;
mod store;

pub use recall::{rank_of_true_image, recall_at_k, RecallQuery};
pub use similar::{build_similar_sets, image_similarity, SimilarSet};
pub use store::{cosine, Embedding, EmbeddingKind, EmbeddingStore, QUERY_CAPTION_INDEX};
