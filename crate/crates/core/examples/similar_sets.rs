//! Build similar-image sets from joint-space embeddings.
//!
//! ```bash
//! cargo run -p ciderbtw --example similar_sets
//! ```

use ciderbtw::corpus::Split;
use ciderbtw::fixture::{synthetic_corpus, FixtureConfig};
use ciderbtw::pipeline::build_sets;
use ciderbtw::retrieval::{image_similarity, EmbeddingStore};

fn main() -> ciderbtw::Result<()> {
    let corpus = synthetic_corpus(&FixtureConfig::default());
    let store = EmbeddingStore::new(corpus.dim, corpus.embeddings.clone())?;
    let sets = build_sets(&corpus.dataset, &store, Split::Test, 3)?;
    for set in &sets {
        let target = corpus.dataset.get(&set.target_id).expect("target in dataset");
        println!("{} \"{}\"", set.target_id, target.captions[0]);
        for (n, s) in set.neighbor_ids.iter().zip(&set.scores) {
            let neighbor = corpus.dataset.get(n).expect("neighbor in dataset");
            println!("    {n}  {s:.3}  \"{}\"", neighbor.captions[0]);
        }
    }
    let first = &sets[0];
    let direct = image_similarity(&store, &first.target_id, &first.neighbor_ids[0])?;
    println!("image_similarity({}, {}) = {direct:.3}", first.target_id, first.neighbor_ids[0]);
    Ok(())
}
