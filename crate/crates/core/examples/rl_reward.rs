//! Training signals: weighted XE loss, reweighted CIDEr reward and the
//! CIDErBtw-penalised reward, for a generic and a distinctive caption.
//!
//! ```bash
//! cargo run -p ciderbtw --example rl_reward
//! ```

use ciderbtw::{
    combine_losses, combined_reward, compute_weights, normalize_text, weighted_xe, CiderParams, DfTable, RewardParams, TokenSeq,
    WeightParams,
};

fn seqs(raw: &[&str]) -> Vec<TokenSeq> {
    raw.iter().map(|s| normalize_text(s)).collect()
}

fn main() -> ciderbtw::Result<()> {
    let target = seqs(&["a dog playing in the park", "a dog with a red frisbee on the grass", "a brown dog catching a red frisbee"]);
    let similar = vec![
        seqs(&["a dog playing in the park", "a dog running on the grass", "two dogs in a park"]),
        seqs(&["a dog sitting in the park", "a puppy on the grass", "a dog playing outside"]),
    ];
    let others = vec![seqs(&["a train at the station"]), seqs(&["a cat on a sofa"])];
    let mut all = vec![target.clone()];
    all.extend(similar.iter().cloned());
    all.extend(others);
    let df = DfTable::from_reference_sets(&all, 4, "demo")?;
    let cparams = CiderParams::default();

    let entries = compute_weights(&target, &similar, &df, &WeightParams::default(), &cparams)?;
    let weights: Vec<f64> = entries.iter().map(|e| e.w).collect();
    for (e, c) in entries.iter().zip(&target) {
        println!("v = {:6.3}  w = {:5.3}  {c}", e.v, e.w);
    }

    let nll = [12.0, 15.5, 14.2];
    let l_xe = weighted_xe(&nll, &weights)?;
    println!("weighted XE loss = {l_xe:.3}");

    let rparams = RewardParams::default();
    for cand in ["a dog playing in the park", "a brown dog with a red frisbee"] {
        let r = combined_reward(&normalize_text(cand), &target, &weights, &similar, &df, &cparams, &rparams)?;
        println!("{cand:<32} r_tilde {:6.3}  ciderbtw {:6.3}  reward {:6.3}", r.r_tilde, r.ciderbtw, r.reward);
    }
    println!("XE stage loss = {}", combine_losses(l_xe, -1.0, 1.0)?);
    println!("RL stage loss = {}", combine_losses(l_xe, -1.0, 0.0)?);
    Ok(())
}
