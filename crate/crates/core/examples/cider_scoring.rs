//! Score candidate captions with CIDEr-D and plain CIDEr.
//!
//! ```bash
//! cargo run -p ciderbtw --example cider_scoring
//! ```

use ciderbtw::corpus::{ImageRecord, Split};
use ciderbtw::{build_df, cider_score, normalize_text, CiderParams, TokenSeq};

fn main() -> ciderbtw::Result<()> {
    let images = vec![
        ImageRecord {
            id: "1".into(),
            split: Split::Test,
            captions: vec!["A red car parked on a quiet road.".into(), "a red sports car on the street".into()],
        },
        ImageRecord { id: "2".into(), split: Split::Test, captions: vec!["a blue bird sitting on a tree branch".into()] },
        ImageRecord { id: "3".into(), split: Split::Test, captions: vec!["a man walking with a dog".into()] },
    ];
    let cider_d = CiderParams::default();
    let df = build_df(&images, &cider_d)?;
    println!("document frequencies: {} n-grams over {} images", df.len(), df.num_images());

    let refs: Vec<TokenSeq> = images[0].captions.iter().map(|c| normalize_text(c)).collect();
    for cand in ["a red car on the road", "a red car", "a car", "a bird on a branch"] {
        let c = normalize_text(cand);
        let d = cider_score(&c, &refs, &df, &cider_d)?;
        let plain = cider_score(&c, &refs, &df, &CiderParams::plain())?;
        println!("{cand:<28} CIDEr-D {d:7.4}   CIDEr {plain:7.4}");
    }
    Ok(())
}
