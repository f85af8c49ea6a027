//! Brute-force reference implementations used to check the library.
//!
//! Nothing here calls into the crate's scoring or retrieval code: n-grams are
//! plain `Vec<String>` keys in hash maps and every loop is the obvious one.
#![allow(dead_code)]

pub mod cli;
pub mod fixtures;

use std::collections::{HashMap, HashSet};

use rand::seq::SliceRandom;
use rand::Rng;

pub fn tokenize(s: &str) -> Vec<String> {
    let cleaned: String = s.chars().map(|c| if c.is_ascii_punctuation() { ' ' } else { c.to_ascii_lowercase() }).collect();
    cleaned.split_whitespace().map(str::to_owned).collect()
}

type Gram = Vec<String>;

fn grams(tokens: &[String], n: usize) -> HashMap<Gram, f64> {
    let mut out = HashMap::new();
    if tokens.len() >= n {
        for i in 0..=tokens.len() - n {
            *out.entry(tokens[i..i + n].to_vec()).or_insert(0.0) += 1.0;
        }
    }
    out
}

/// Document frequencies over images: a gram counts once per image that has
/// it in any reference.
pub struct OracleDf {
    df: HashMap<Gram, usize>,
    images: usize,
}

impl OracleDf {
    pub fn new(corpus: &[Vec<String>]) -> Self {
        let mut df = HashMap::new();
        for refs in corpus {
            let mut seen: HashSet<Gram> = HashSet::new();
            for r in refs {
                let t = tokenize(r);
                for n in 1..=4 {
                    seen.extend(grams(&t, n).into_keys());
                }
            }
            for g in seen {
                *df.entry(g).or_insert(0) += 1;
            }
        }
        OracleDf { df, images: corpus.len() }
    }

    fn idf(&self, g: &Gram) -> f64 {
        let d = *self.df.get(g).unwrap_or(&0);
        (self.images as f64).ln() - (d.max(1) as f64).ln()
    }

    fn vector(&self, tokens: &[String], n: usize) -> HashMap<Gram, f64> {
        grams(tokens, n)
            .into_iter()
            .map(|(g, tf)| {
                let w = tf * self.idf(&g);
                (g, w)
            })
            .collect()
    }

    /// Score against a single reference.
    pub fn pair(&self, cand: &str, reference: &str, clipped: bool, sigma: f64) -> f64 {
        let (tc, tr) = (tokenize(cand), tokenize(reference));
        let mut total = 0.0;
        for n in 1..=4 {
            let (vc, vr) = (self.vector(&tc, n), self.vector(&tr, n));
            let mut num = 0.0;
            for (g, &a) in &vc {
                let b = *vr.get(g).unwrap_or(&0.0);
                num += if clipped { a.min(b) * b } else { a * b };
            }
            let na = vc.values().map(|x| x * x).sum::<f64>().sqrt();
            let nb = vr.values().map(|x| x * x).sum::<f64>().sqrt();
            let mut val = if na > 0.0 && nb > 0.0 { num / (na * nb) } else { 0.0 };
            if clipped {
                let delta = tc.len() as f64 - tr.len() as f64;
                val *= (-(delta * delta) / (2.0 * sigma * sigma)).exp();
            }
            total += val;
        }
        10.0 * total / 4.0
    }

    pub fn cider_d(&self, cand: &str, refs: &[String]) -> f64 {
        refs.iter().map(|r| self.pair(cand, r, true, 6.0)).sum::<f64>() / refs.len() as f64
    }

    pub fn cider_plain(&self, cand: &str, refs: &[String]) -> f64 {
        refs.iter().map(|r| self.pair(cand, r, false, 6.0)).sum::<f64>() / refs.len() as f64
    }

    pub fn ciderbtw(&self, cand: &str, similar: &[&[String]]) -> f64 {
        let pairs: Vec<f64> = similar.iter().flat_map(|refs| refs.iter()).map(|r| self.pair(cand, r, true, 6.0)).collect();
        pairs.iter().sum::<f64>() / pairs.len() as f64
    }
}

pub fn strings(raw: &[&str]) -> Vec<String> {
    raw.iter().map(|s| s.to_string()).collect()
}

/// Random captions over a small vocabulary, with occasional punctuation and
/// capitals so tokenization is exercised too.
pub fn random_caption(rng: &mut impl Rng, vocab: &[String], max_len: usize) -> String {
    let len = rng.gen_range(1..=max_len);
    let mut words: Vec<String> = (0..len).map(|_| vocab.choose(rng).unwrap().clone()).collect();
    if rng.gen_bool(0.2) {
        words[0] = words[0].to_uppercase();
    }
    let mut s = words.join(" ");
    if rng.gen_bool(0.3) {
        s.push('.');
    }
    s
}

pub fn random_vocab(rng: &mut impl Rng, size: usize) -> Vec<String> {
    (0..size).map(|i| format!("w{i}{}", ["", "x", "yy"][rng.gen_range(0..3)])).collect()
}

/// A corpus of `1..=10` images with `1..=5` references each.
pub fn random_corpus(rng: &mut impl Rng) -> Vec<Vec<String>> {
    let size = rng.gen_range(2..=20);
    let vocab = random_vocab(rng, size);
    let images = rng.gen_range(1..=10);
    (0..images).map(|_| (0..rng.gen_range(1..=5)).map(|_| random_caption(rng, &vocab, 12)).collect()).collect()
}

pub fn cosine64(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    dot / (na * nb)
}

pub fn widen(v: &[f32]) -> Vec<f64> {
    v.iter().map(|&x| f64::from(x)).collect()
}

/// Similar images by scanning every caption of every other pool image:
/// rank all `(image, caption)` pairs by cosine to the target image
/// (ties by image id, then caption index) and keep the first `k` distinct
/// images other than the target. Returns `(id, best caption cosine)`.
pub fn exhaustive_similar(
    images: &[(String, Vec<f64>)],
    captions: &[(String, usize, Vec<f64>)],
    target: &str,
    k: usize,
) -> Vec<(String, f64)> {
    let tv = &images.iter().find(|(id, _)| id == target).unwrap().1;
    let mut scored: Vec<(f64, &str, usize)> = captions.iter().map(|(id, idx, v)| (cosine64(tv, v), id.as_str(), *idx)).collect();
    scored.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(b.1)).then(a.2.cmp(&b.2)));
    let mut out: Vec<(String, f64)> = Vec::new();
    for (s, id, _) in scored {
        if id != target && !out.iter().any(|(o, _)| o == id) {
            out.push((id.to_owned(), s));
        }
        if out.len() == k {
            break;
        }
    }
    out
}

/// 1-based rank of `truth` after sorting the gallery by descending cosine,
/// ties by ascending id.
pub fn exhaustive_rank(gallery: &[(String, Vec<f64>)], query: &[f64], truth: &str) -> usize {
    let mut scored: Vec<(f64, &str)> = gallery.iter().map(|(id, v)| (cosine64(query, v), id.as_str())).collect();
    scored.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(b.1)));
    scored.iter().position(|(_, id)| *id == truth).unwrap() + 1
}

pub fn exhaustive_recall(gallery: &[(String, Vec<f64>)], queries: &[(Vec<f64>, String)], k: usize) -> f64 {
    let hits = queries.iter().filter(|(q, t)| exhaustive_rank(gallery, q, t) <= k).count();
    100.0 * hits as f64 / queries.len() as f64
}

/// The distinctiveness fixture: target `T`, two similar images about dogs on
/// grass, two mirrored images about cats on sofas and one unrelated image.
/// Swapping dog/cat and grass/sofa maps the corpus onto itself, so both
/// subjects have identical document frequencies.
pub fn six_image_corpus() -> Vec<(&'static str, Vec<String>)> {
    let t =
        strings(&["a dog on the grass", "a cat on the sofa", "a brown dog on the grass", "a brown cat on the sofa", "an animal at home"]);
    let s1 = strings(&[
        "a dog on the grass",
        "a dog running on the grass",
        "the dog is on the grass",
        "a dog playing on grass",
        "a black dog on the grass",
    ]);
    let s2 = strings(&[
        "a dog sitting on the grass",
        "a dog on the green grass",
        "two dogs on the grass",
        "a puppy on the grass",
        "a dog lying on the grass",
    ]);
    let mirror = |refs: &[String]| -> Vec<String> {
        refs.iter()
            .map(|r| {
                r.split(' ')
                    .map(|w| match w {
                        "dog" => "cat",
                        "grass" => "sofa",
                        "puppy" => "kitten",
                        "dogs" => "cats",
                        other => other,
                    })
                    .collect::<Vec<_>>()
                    .join(" ")
            })
            .collect()
    };
    let o1 = mirror(&s1);
    let o2 = mirror(&s2);
    let o3 = strings(&[
        "a train at the station",
        "a red train on the tracks",
        "people waiting for a train",
        "a train pulling into a station",
        "an old train",
    ]);
    vec![("T", t), ("S1", s1), ("S2", s2), ("O1", o1), ("O2", o2), ("O3", o3)]
}

pub const GENERIC: &str = "a dog on the grass";
pub const DISTINCTIVE: &str = "a cat on the sofa";
