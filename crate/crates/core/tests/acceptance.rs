//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
//! failure. Run with `cargo test --test acceptance`.

mod common;

use std::collections::HashMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use ciderbtw::corpus::{CandidateSet, Split};
use ciderbtw::fixture::{synthetic_corpus, FixtureConfig};
use ciderbtw::pipeline::{build_sets, evaluate, EvalOptions};
use ciderbtw::retrieval::{build_similar_sets, recall_at_k, EmbeddingStore, RecallQuery};
use ciderbtw::{
    cider_score, ciderbtw, combined_reward, normalize_text, weights_from_scores, CiderParams, DfTable, RewardParams, TokenSeq, WeightParams,
};
use common::cli::{fixture, pipeline, run};
use common::fixtures::{random_store, store_and_tables, ten_image_fixture};
use common::{
    exhaustive_recall, exhaustive_similar, random_caption, random_corpus, six_image_corpus, widen, OracleDf, DISTINCTIVE, GENERIC,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn seqs(raw: &[String]) -> Vec<TokenSeq> {
    raw.iter().map(|s| normalize_text(s)).collect()
}

fn df_of(corpus: &[Vec<String>]) -> DfTable {
    let sets: Vec<Vec<TokenSeq>> = corpus.iter().map(|r| seqs(r)).collect();
    DfTable::from_reference_sets(&sets, 4, "acceptance").unwrap()
}

fn vocab_of(corpus: &[Vec<String>]) -> Vec<String> {
    let mut v: Vec<String> = corpus.iter().flatten().flat_map(|c| common::tokenize(c)).collect();
    v.sort();
    v.dedup();
    v
}

fn cider_oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    let mut checks = 0;
    for corpus_no in 0..50 {
        let corpus = random_corpus(&mut rng);
        let df = df_of(&corpus);
        let oracle = OracleDf::new(&corpus);
        let vocab = vocab_of(&corpus);
        for refs in &corpus {
            let cand = random_caption(&mut rng, &vocab, 12);
            let c = normalize_text(&cand);
            let r = seqs(refs);
            let d = cider_score(&c, &r, &df, &CiderParams::default()).map_err(|e| e.to_string())?;
            let p = cider_score(&c, &r, &df, &CiderParams::plain()).map_err(|e| e.to_string())?;
            let (od, op) = (oracle.cider_d(&cand, refs), oracle.cider_plain(&cand, refs));
            worst = worst.max((d - od).abs()).max((p - op).abs());
            ensure((d - od).abs() <= 1e-9 && (p - op).abs() <= 1e-9, || {
                format!("corpus {corpus_no}: `{cand}` engine {d}/{p} oracle {od}/{op}")
            })?;
            checks += 2;
        }
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(60), || format!("took {elapsed:?}"))?;
    Ok(format!("50 corpora, {checks} scores, max |diff| {worst:.1e}, {:.2}s", elapsed.as_secs_f64()))
}

fn ciderbtw_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut worst: f64 = 0.0;
    let mut fixtures = 0;
    while fixtures < 200 {
        let corpus = random_corpus(&mut rng);
        if corpus.len() < 2 {
            continue;
        }
        let df = df_of(&corpus);
        let oracle = OracleDf::new(&corpus);
        let mut others: Vec<usize> = (1..corpus.len()).collect();
        others.shuffle(&mut rng);
        others.truncate(rng.gen_range(1..=others.len().min(5)));
        let similar: Vec<Vec<TokenSeq>> = others.iter().map(|&i| seqs(&corpus[i])).collect();
        let cand = random_caption(&mut rng, &vocab_of(&corpus), 12);
        let c = normalize_text(&cand);

        let btw = ciderbtw(&c, &similar, &df, &CiderParams::default()).map_err(|e| e.to_string())?;
        let pairs: Vec<f64> =
            similar.iter().flatten().map(|r| cider_score(&c, std::slice::from_ref(r), &df, &CiderParams::default()).unwrap()).collect();
        let mean = pairs.iter().sum::<f64>() / pairs.len() as f64;
        let raw: Vec<&[String]> = others.iter().map(|&i| corpus[i].as_slice()).collect();
        let o = oracle.ciderbtw(&cand, &raw);
        worst = worst.max((btw - mean).abs());
        ensure((btw - mean).abs() <= 1e-12, || format!("fixture {fixtures}: {btw} vs mean {mean}"))?;
        ensure((btw - o).abs() <= 1e-9, || format!("fixture {fixtures}: {btw} vs oracle {o}"))?;
        fixtures += 1;
    }
    Ok(format!("200 fixtures, max |ciderbtw - mean(pairs)| {worst:.1e}"))
}

fn weight_law() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for case in 0..2000 {
        let lambda = rng.gen_range(0.01..3.0);
        let alpha = if case % 10 == 0 { 0.0 } else { rng.gen_range(0.0..=lambda) };
        let p = WeightParams::new(lambda, alpha).map_err(|e| e.to_string())?;
        let len = rng.gen_range(1..=8);
        let v: Vec<f64> = (0..len).map(|_| if rng.gen_bool(0.2) { 0.0 } else { rng.gen_range(0.0..10.0) }).collect();
        let w = weights_from_scores(&v, &p);
        let max = v.iter().copied().fold(0.0, f64::max);
        for i in 0..len {
            ensure(w[i] >= lambda - alpha - 1e-12 && w[i] <= lambda + 1e-12, || format!("case {case}: w {} outside range", w[i]))?;
            if max > 0.0 && v[i] == max {
                ensure(w[i] == lambda - alpha, || format!("case {case}: max v gives {} not {}", w[i], lambda - alpha))?;
            }
            for j in 0..len {
                if v[i] < v[j] {
                    ensure(w[i] >= w[j], || format!("case {case}: not antitone"))?;
                }
            }
        }
        if max == 0.0 {
            ensure(w.iter().all(|&x| x == lambda), || format!("case {case}: degenerate rule violated"))?;
        }
        let c = rng.gen_range(1e-3..1e3);
        let scaled = weights_from_scores(&v.iter().map(|x| x * c).collect::<Vec<_>>(), &p);
        ensure(w.iter().zip(&scaled).all(|(a, b)| (a - b).abs() <= 1e-12), || format!("case {case}: not scale invariant"))?;
    }
    let example = weights_from_scores(&[2.0, 4.0], &WeightParams::new(1.5, 1.0).map_err(|e| e.to_string())?);
    ensure(example == [1.0, 0.5], || format!("v={{2,4}} gave {example:?}"))?;
    Ok("2000 random v vectors; v={2,4}, lambda_w=1.5, alpha_w=1 -> w={1.0, 0.5}".into())
}

fn reward_laws() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let cparams = CiderParams::default();
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    while cases < 200 {
        let corpus = random_corpus(&mut rng);
        if corpus.len() < 2 {
            continue;
        }
        let df = df_of(&corpus);
        let gts = seqs(&corpus[0]);
        let weights: Vec<f64> = (0..gts.len()).map(|_| rng.gen_range(1.0..1.5)).collect();
        let similar: Vec<Vec<TokenSeq>> = corpus[1..].iter().map(|r| seqs(r)).collect();
        let cand = normalize_text(&random_caption(&mut rng, &vocab_of(&corpus), 12));
        let alpha_r = rng.gen_range(0.0..2.0);
        let r = combined_reward(&cand, &gts, &weights, &similar, &df, &cparams, &RewardParams::new(alpha_r, 0.0).unwrap())
            .map_err(|e| e.to_string())?;
        let gap = (r.reward + alpha_r * r.ciderbtw - r.r_tilde).abs();
        worst = worst.max(gap);
        ensure(gap <= 1e-12, || format!("case {cases}: decomposition off by {gap}"))?;
        let zero = combined_reward(&cand, &gts, &weights, &similar, &df, &cparams, &RewardParams::new(0.0, 0.0).unwrap()).unwrap();
        ensure(zero.reward == zero.r_tilde, || format!("case {cases}: alpha_r=0 did not collapse"))?;
        cases += 1;
    }

    let corpus: Vec<Vec<String>> = six_image_corpus().into_iter().map(|(_, r)| r).collect();
    let df = df_of(&corpus);
    let oracle = OracleDf::new(&corpus);
    let target = seqs(&corpus[0]);
    let similar = vec![seqs(&corpus[1]), seqs(&corpus[2])];
    let raw_similar: Vec<&[String]> = vec![&corpus[1], &corpus[2]];
    let ones = vec![1.0; target.len()];
    let oracle_r = |c: &str| corpus[0].iter().map(|r| oracle.pair(c, r, true, 6.0)).sum::<f64>() / corpus[0].len() as f64;
    let (og, od) = (oracle_r(GENERIC), oracle_r(DISTINCTIVE));
    let (bg, bd) = (oracle.ciderbtw(GENERIC, &raw_similar), oracle.ciderbtw(DISTINCTIVE, &raw_similar));
    ensure((og - od).abs() <= 1e-12 && bg > bd, || format!("oracle components: R~ {og}/{od}, btw {bg}/{bd}"))?;
    for alpha_r in [1e-6, 1e-3, 0.1, 0.4, 1.0, 10.0] {
        let rp = RewardParams::new(alpha_r, 0.0).unwrap();
        let g = combined_reward(&normalize_text(GENERIC), &target, &ones, &similar, &df, &cparams, &rp).unwrap();
        let d = combined_reward(&normalize_text(DISTINCTIVE), &target, &ones, &similar, &df, &cparams, &rp).unwrap();
        ensure((g.r_tilde - og).abs() <= 1e-12 && (d.r_tilde - od).abs() <= 1e-12, || "R~ differs from oracle".into())?;
        ensure((g.ciderbtw - bg).abs() <= 1e-12 && (d.ciderbtw - bd).abs() <= 1e-12, || "CIDErBtw differs from oracle".into())?;
        ensure(d.reward > g.reward, || format!("alpha_r={alpha_r}: distinctive {} <= generic {}", d.reward, g.reward))?;
    }
    Ok(format!("200 fixtures, max decomposition gap {worst:.1e}; six-image fixture R~ {og:.4} both, CIDErBtw {bg:.4} vs {bd:.4}"))
}

fn similar_set_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4242);
    let mut targets = 0;
    for trial in 0..40 {
        let (dim, emb) = random_store(&mut rng, 50);
        let (store, images, captions) = store_and_tables(dim, &emb);
        let ids: Vec<&str> = images.iter().map(|(id, _)| id.as_str()).collect();
        let k = rng.gen_range(1..ids.len()).min(5);
        let sets = build_similar_sets(&store, &ids, &ids, k, 5).map_err(|e| e.to_string())?;
        for s in &sets {
            ensure(!s.neighbor_ids.contains(&s.target_id), || format!("trial {trial}: {} retrieved itself", s.target_id))?;
            let want: Vec<String> = exhaustive_similar(&images, &captions, &s.target_id, k).into_iter().map(|(id, _)| id).collect();
            ensure(s.neighbor_ids == want, || format!("trial {trial}, target {}: {:?} vs {want:?}", s.target_id, s.neighbor_ids))?;
            targets += 1;
        }
    }

    let corpus = synthetic_corpus(&FixtureConfig::default());
    let store = EmbeddingStore::new(corpus.dim, corpus.embeddings.clone()).map_err(|e| e.to_string())?;
    let sets = build_sets(&corpus.dataset, &store, Split::Test, 5).map_err(|e| e.to_string())?;
    let test_ids: Vec<String> = corpus.dataset.split(Split::Test).iter().map(|r| r.id.clone()).collect();
    let mut captions = HashMap::new();
    for id in &test_ids {
        captions.insert(id.clone(), corpus.dataset.get(id).unwrap().captions[0].clone());
    }
    let cands = [CandidateSet { system: "gt".into(), captions: captions.clone() }];
    let eval = evaluate(&corpus.dataset, None, &sets, &cands, &EvalOptions::default()).map_err(|e| e.to_string())?;
    let raw: Vec<Vec<String>> = corpus.dataset.split(Split::Test).iter().map(|r| r.captions.clone()).collect();
    let oracle = OracleDf::new(&raw);
    for (row, set) in eval.report.systems[0].rows.iter().zip(&sets) {
        ensure(row.btw_pairs == 25, || format!("{}: {} pairs", row.image_id, row.btw_pairs))?;
        let similar: Vec<&[String]> = set.neighbor_ids.iter().map(|n| corpus.dataset.get(n).unwrap().captions.as_slice()).collect();
        let want = oracle.ciderbtw(&row.caption, &similar);
        ensure((row.ciderbtw - want).abs() <= 1e-9, || format!("{}: {} vs oracle mean of 25 {want}", row.image_id, row.ciderbtw))?;
    }
    Ok(format!("{targets} targets over 40 stores match the exhaustive scan, no self-retrieval; K=5, N=5 rows average 25 pairs"))
}

fn recall_criterion() -> Outcome {
    let (emb, queries) = ten_image_fixture();
    let store = EmbeddingStore::new(5, emb.clone()).map_err(|e| e.to_string())?;
    let identity: Vec<RecallQuery> =
        emb.iter().map(|e| RecallQuery { id: e.id.clone(), vector: e.vector.clone(), true_image: e.id.clone() }).collect();
    let r = recall_at_k(&store, &identity, &[1, 5, 10]).map_err(|e| e.to_string())?;
    ensure(r.values().all(|&x| x == 100.0), || format!("identity recall {r:?}"))?;

    let gallery: Vec<(String, Vec<f64>)> = emb.iter().map(|e| (e.id.clone(), widen(&e.vector))).collect();
    let wide: Vec<(Vec<f64>, String)> = queries.iter().map(|(q, t)| (widen(q), t.clone())).collect();
    let rq: Vec<RecallQuery> =
        queries.iter().enumerate().map(|(i, (q, t))| RecallQuery { id: i.to_string(), vector: q.clone(), true_image: t.clone() }).collect();
    let got = recall_at_k(&store, &rq, &[1, 5, 10]).map_err(|e| e.to_string())?;
    for k in [1, 5, 10] {
        let want = exhaustive_recall(&gallery, &wide, k);
        ensure(got[&k] == want, || format!("R@{k}: {} vs oracle {want}", got[&k]))?;
    }
    Ok(format!("identity R@1/5/10 = 100; hand-set fixture R@1 {} R@5 {} R@10 {} match oracle", got[&1], got[&5], got[&10]))
}

fn p(path: &std::path::Path) -> String {
    path.to_str().unwrap().to_owned()
}

fn pipeline_criterion() -> Outcome {
    let dirs: Vec<tempfile::TempDir> = (0..3).map(|_| tempfile::tempdir().unwrap()).collect();
    let start = Instant::now();
    let first = pipeline(dirs[0].path(), None);
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(5), || format!("pipeline took {elapsed:?}"))?;
    let second = pipeline(dirs[1].path(), Some(1));
    let four = pipeline(dirs[2].path(), Some(4));
    ensure(first == second, || "outputs differ between runs".into())?;
    ensure(first == four, || "outputs differ between 1 and 4 threads".into())?;

    // Reward session on the test split, cross-checked against eval.
    let dir = dirs[0].path();
    let dataset = p(&fixture("dataset.json"));
    let sets = p(&dir.join("test_sets.jsonl"));
    let weights = p(&dir.join("test_weights.jsonl"));
    let out = run(&["weights", "--dataset", &dataset, "--similar-sets", &sets, "--split", "test", "--output", &weights], None, None);
    ensure(out.status.success(), || String::from_utf8_lossy(&out.stderr).into_owned())?;

    let data: Value = serde_json::from_slice(&std::fs::read(fixture("dataset.json")).unwrap()).unwrap();
    let test: Vec<(String, Vec<String>)> = data["images"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|i| i["split"] == "test")
        .map(|i| {
            let caps = i["captions"].as_array().unwrap().iter().map(|c| c.as_str().unwrap().to_owned()).collect();
            (i["id"].as_str().unwrap().to_owned(), caps)
        })
        .collect();
    let cands: String = test.iter().map(|(id, c)| json!({"image_id": id, "caption": c[0]}).to_string() + "\n").collect();
    let cand_path = dir.join("gt.jsonl");
    std::fs::write(&cand_path, cands).unwrap();
    let out = run(&["eval", "--dataset", &dataset, "--similar-sets", &sets, "--candidates", &p(&cand_path)], None, None);
    ensure(out.status.success(), || String::from_utf8_lossy(&out.stderr).into_owned())?;
    let report: Value = serde_json::from_slice(&out.stdout).map_err(|e| e.to_string())?;
    let rows = report["systems"][0]["rows"].as_array().unwrap().clone();

    let total = 20_000;
    let requests: String = (0..total)
        .map(|i| {
            let (id, caps) = &test[i % test.len()];
            let cand = if i < test.len() { caps[0].clone() } else { caps[i % caps.len()].clone() };
            json!({"seq": i, "image_id": id, "candidate": cand}).to_string() + "\n"
        })
        .collect();
    let start = Instant::now();
    let out = run(
        &["reward-serve", "--dataset", &dataset, "--similar-sets", &sets, "--weights", &weights, "--split", "test"],
        None,
        Some(requests.as_bytes()),
    );
    let served = start.elapsed();
    ensure(out.status.success(), || String::from_utf8_lossy(&out.stderr).into_owned())?;
    let resp: Vec<Value> = String::from_utf8_lossy(&out.stdout).lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    ensure(resp.len() == total, || format!("{} responses for {total} requests", resp.len()))?;
    ensure(resp.iter().enumerate().all(|(i, r)| r["seq"] == i), || "responses out of order".into())?;
    let rate = total as f64 / served.as_secs_f64();
    ensure(rate >= 1000.0, || format!("{rate:.0} req/s"))?;
    for (row, r) in rows.iter().zip(&resp) {
        for key in ["cider", "ciderbtw"] {
            let (a, b) = (row[key].as_f64().unwrap(), r[key].as_f64().unwrap());
            ensure((a - b).abs() <= 1e-9, || format!("{}: eval {key} {a} vs reward-serve {b}", row["image_id"]))?;
        }
    }
    Ok(format!(
        "pipeline {:.2}s, identical across runs and 1/4 threads; reward-serve {rate:.0} req/s incl. startup, matches eval",
        elapsed.as_secs_f64()
    ))
}

fn main() {
    let criteria: [Criterion; 7] = [
        ("cider-oracle", cider_oracle_equivalence),
        ("ciderbtw-identity", ciderbtw_identity),
        ("weight-law", weight_law),
        ("reward-laws", reward_laws),
        ("similar-sets", similar_set_oracle),
        ("recall-at-k", recall_criterion),
        ("pipeline", pipeline_criterion),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        match outcome {
            Ok(detail) => println!("PASS {name:<18} {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL {name:<18} {why}");
            }
        }
    }
    // Table 1 numbers need trained models; the criteria above stand in for them.
    if failed == 0 {
        println!("PASS {:<18} paper-scale results out of scope; all oracle and invariant criteria hold", "scope");
    } else {
        println!("FAIL {:<18} {failed} criteria failed", "scope");
        std::process::exit(1);
    }
}
