//! Caption-to-image recall@K for two candidate systems.
//!
//! ```bash
//! cargo run -p ciderbtw --example recall_at_k
//! ```

use ciderbtw::corpus::Split;
use ciderbtw::fixture::{synthetic_corpus, FixtureConfig};
use ciderbtw::retrieval::{recall_at_k, EmbeddingStore, RecallQuery};

fn main() -> ciderbtw::Result<()> {
    let corpus = synthetic_corpus(&FixtureConfig::default());
    let store = EmbeddingStore::new(corpus.dim, corpus.embeddings.clone())?;
    let test: Vec<&str> = corpus.dataset.split(Split::Test).iter().map(|r| r.id.as_str()).collect();
    let gallery = store.restrict_to(&test)?;
    for system in ["baseline", "distinct"] {
        let queries: Vec<RecallQuery> = test
            .iter()
            .map(|id| RecallQuery {
                id: id.to_string(),
                vector: gallery.query_vector(Some(system), id).expect("fixture has queries").to_vec(),
                true_image: id.to_string(),
            })
            .collect();
        let r = recall_at_k(&gallery, &queries, &[1, 5, 10])?;
        println!("{system:<9} R@1 {:6.2}  R@5 {:6.2}  R@10 {:6.2}", r[&1], r[&5], r[&10]);
    }
    Ok(())
}
