//! Drive the JSON-lines reward protocol in-process, the way an RL training
//! loop would talk to `ciderbtw reward-serve` over a pipe.
//!
//! ```bash
//! cargo run -p ciderbtw --example reward_session
//! ```

use ciderbtw::corpus::Split;
use ciderbtw::fixture::{synthetic_corpus, FixtureConfig};
use ciderbtw::pipeline::{build_sets, build_weight_table};
use ciderbtw::retrieval::EmbeddingStore;
use ciderbtw::reward::RewardService;
use ciderbtw::{CiderParams, RewardParams, WeightParams};

fn main() -> ciderbtw::Result<()> {
    let corpus = synthetic_corpus(&FixtureConfig::default());
    let store = EmbeddingStore::new(corpus.dim, corpus.embeddings.clone())?;
    let sets = build_sets(&corpus.dataset, &store, Split::Train, 5)?;
    let (_, weights) =
        build_weight_table(&corpus.dataset, &sets, Split::Train, Split::Train, WeightParams::default(), CiderParams::default())?;
    let service = RewardService::new(&corpus.dataset, &sets, &weights, Split::Train, CiderParams::default(), RewardParams::default())?;

    let generic = corpus.candidates.iter().find(|c| c.system == "baseline").expect("fixture candidate");
    let specific = corpus.candidates.iter().find(|c| c.system == "distinct" && c.image_id == generic.image_id).expect("fixture candidate");
    let requests = format!(
        "{}\n{}\n{}\nnot json\n",
        serde_json::json!({"seq": 1, "image_id": generic.image_id, "candidate": generic.caption}),
        serde_json::json!({"seq": 2, "image_id": specific.image_id, "candidate": specific.caption}),
        serde_json::json!({"image_id": "missing", "candidate": "a dog"}),
    );
    let mut responses = Vec::new();
    let n = service.serve(requests.as_bytes(), &mut responses)?;
    println!("{n} requests");
    print!("{}", String::from_utf8_lossy(&responses));
    Ok(())
}
