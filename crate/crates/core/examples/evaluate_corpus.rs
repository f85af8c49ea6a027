//! End-to-end evaluation: similar sets, then CIDEr, CIDErBtw and recall@K
//! for every candidate system, rendered as a markdown table.
//!
//! ```bash
//! cargo run -p ciderbtw --example evaluate_corpus
//! ```

use std::collections::HashMap;

use ciderbtw::corpus::{write_report, CandidateSet, ReportFormat, Split};
use ciderbtw::fixture::{synthetic_corpus, FixtureConfig};
use ciderbtw::pipeline::{build_sets, evaluate, EvalOptions};
use ciderbtw::retrieval::EmbeddingStore;

fn main() -> ciderbtw::Result<()> {
    let corpus = synthetic_corpus(&FixtureConfig::default());
    let store = EmbeddingStore::new(corpus.dim, corpus.embeddings.clone())?;
    let sets = build_sets(&corpus.dataset, &store, Split::Test, 5)?;

    let mut systems: Vec<CandidateSet> = Vec::new();
    for c in &corpus.candidates {
        if !systems.iter().any(|s| s.system == c.system) {
            systems.push(CandidateSet { system: c.system.clone(), captions: HashMap::new() });
        }
        let set = systems.iter_mut().find(|s| s.system == c.system).expect("just inserted");
        set.captions.insert(c.image_id.clone(), c.caption.clone());
    }
    for s in &mut systems {
        s.captions.retain(|id, _| corpus.dataset.get(id).is_some_and(|r| r.split == Split::Test));
    }

    let eval = evaluate(&corpus.dataset, Some(&store), &sets, &systems, &EvalOptions::default())?;
    print!("{}", String::from_utf8_lossy(&write_report(&eval.report, ReportFormat::Markdown)));
    Ok(())
}
