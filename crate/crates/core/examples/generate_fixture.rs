//! Writes the bundled fixture corpus (dataset, embeddings, candidates).
//!
//! ```bash
//! cargo run -p ciderbtw --example generate_fixture -- crates/core/fixtures
//! ```

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use ciderbtw::corpus::{write_embeddings, Split};
use ciderbtw::fixture::{synthetic_corpus, Candidate, FixtureConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "fixtures".into()));
    fs::create_dir_all(&dir)?;
    let corpus = synthetic_corpus(&FixtureConfig::default());

    fs::write(dir.join("dataset.json"), corpus.dataset.to_json() + "\n")?;

    let mut emb = BufWriter::new(File::create(dir.join("embeddings.jsonl"))?);
    write_embeddings(&mut emb, corpus.dim, &corpus.embeddings)?;
    emb.flush()?;

    let mut cands = BufWriter::new(File::create(dir.join("candidates.jsonl"))?);
    // Only the evaluation split: eval rejects candidates for other images.
    let is_test = |c: &&Candidate| corpus.dataset.get(&c.image_id).is_some_and(|r| r.split == Split::Test);
    let mut written = 0;
    for c in corpus.candidates.iter().filter(is_test) {
        written += 1;
        let line = serde_json::json!({ "image_id": c.image_id, "caption": c.caption, "system": c.system });
        writeln!(cands, "{line}")?;
    }
    cands.flush()?;

    println!(
        "wrote {} images ({}), {} embeddings, {} candidates to {}",
        corpus.dataset.len(),
        corpus.dataset.split_counts(),
        corpus.embeddings.len(),
        written,
        dir.display()
    );
    Ok(())
}
