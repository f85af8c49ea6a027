//! Weight each ground-truth caption by its distinctiveness.
//!
//! Captions that overlap less with the similar images' captions get a
//! lower CIDErBtw and therefore a larger training weight.
//!
//! ```bash
//! cargo run -p ciderbtw --example ground_truth_weights
//! ```

use ciderbtw::corpus::Split;
use ciderbtw::fixture::{synthetic_corpus, FixtureConfig};
use ciderbtw::pipeline::{build_sets, build_weight_table};
use ciderbtw::retrieval::EmbeddingStore;
use ciderbtw::{CiderParams, WeightParams};

fn main() -> ciderbtw::Result<()> {
    let corpus = synthetic_corpus(&FixtureConfig::default());
    let store = EmbeddingStore::new(corpus.dim, corpus.embeddings.clone())?;
    let sets = build_sets(&corpus.dataset, &store, Split::Train, 5)?;
    let (meta, table) =
        build_weight_table(&corpus.dataset, &sets, Split::Train, Split::Train, WeightParams::default(), CiderParams::default())?;
    println!("lambda_w = {}, alpha_w = {}, df split = {}", meta.lambda_w, meta.alpha_w, meta.df_split);

    for (id, entries) in table.iter().take(3) {
        let image = corpus.dataset.get(id).expect("image in dataset");
        println!("{id}");
        for e in entries {
            println!("    v = {:6.3}  w = {:5.3}  {}", e.v, e.w, image.captions[e.caption_index]);
        }
    }
    Ok(())
}
