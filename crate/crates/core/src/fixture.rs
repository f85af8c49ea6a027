//! Seeded synthetic corpora for tests, examples and the bundled fixture.
//!
//! Images belong to topics (dogs in parks, trains at stations, ...) and each
//! carries one distinctive detail such as "red frisbee". Some ground truths
//! mention the detail, others only the topic, so their CIDErBtw differs.
//! Embeddings mirror that structure: a topic centroid plus a per-image
//! offset, with detail-bearing captions embedded close to their image.
//! Two candidate systems are produced: `baseline` writes topic-only captions
//! and `distinct` names the detail.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::corpus::{Dataset, ImageRecord, Split};
use crate::retrieval::Embedding;

struct Topic {
    subjects: &'static [&'static str],
    scenes: &'static [&'static str],
    verbs: &'static [&'static str],
}

const TOPICS: &[Topic] = &[
    Topic { subjects: &["dog", "puppy"], scenes: &["park", "yard", "field"], verbs: &["running", "playing", "sitting"] },
    Topic { subjects: &["train", "locomotive"], scenes: &["station", "platform", "track"], verbs: &["arriving", "waiting", "moving"] },
    Topic { subjects: &["surfer", "boy"], scenes: &["ocean", "wave", "beach"], verbs: &["riding", "paddling", "standing"] },
    Topic { subjects: &["cat", "kitten"], scenes: &["sofa", "window", "bed"], verbs: &["sleeping", "resting", "lying"] },
    Topic { subjects: &["skier", "woman"], scenes: &["slope", "mountain", "snow"], verbs: &["skiing", "posing", "turning"] },
    Topic { subjects: &["pizza", "sandwich"], scenes: &["table", "plate", "kitchen"], verbs: &["sitting", "served", "placed"] },
    Topic { subjects: &["bird", "parrot"], scenes: &["tree", "branch", "feeder"], verbs: &["perched", "singing", "eating"] },
    Topic { subjects: &["bus", "truck"], scenes: &["street", "road", "corner"], verbs: &["parked", "driving", "stopped"] },
];

const COLORS: &[&str] = &["red", "blue", "green", "yellow", "white", "black", "orange", "purple", "brown", "pink"];
const OBJECTS: &[&str] = &["frisbee", "umbrella", "ball", "hat", "bag", "kite", "bench", "sign", "flag", "bicycle", "box", "scarf"];

#[derive(Clone, Debug)]
pub struct FixtureConfig {
    pub seed: u64,
    pub train: usize,
    pub val: usize,
    pub test: usize,
    pub captions_per_image: usize,
    pub dim: usize,
    /// Number of topics in use, at most 8.
    pub topics: usize,
}

impl Default for FixtureConfig {
    fn default() -> Self {
        FixtureConfig { seed: 7, train: 40, val: 10, test: 10, captions_per_image: 5, dim: 16, topics: 4 }
    }
}

#[derive(Clone, Debug)]
pub struct Candidate {
    pub system: String,
    pub image_id: String,
    pub caption: String,
}

#[derive(Clone, Debug)]
pub struct SyntheticCorpus {
    pub dataset: Dataset,
    pub dim: usize,
    /// Image, ground-truth caption and candidate query embeddings.
    pub embeddings: Vec<Embedding>,
    pub candidates: Vec<Candidate>,
}

struct ImagePlan<'t> {
    topic: &'t Topic,
    topic_idx: usize,
    subject: &'static str,
    scene: &'static str,
    color: &'static str,
    object: &'static str,
}

fn gaussian(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
}

fn mix(parts: &[(f64, &[f64])]) -> Vec<f32> {
    let dim = parts[0].1.len();
    (0..dim)
        .map(|d| {
            let v: f64 = parts.iter().map(|(w, p)| w * p[d]).sum();
            // Four decimals keep fixture files small and stable.
            ((v * 1e4).round() / 1e4) as f32
        })
        .collect()
}

pub fn synthetic_corpus(cfg: &FixtureConfig) -> SyntheticCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let topics = &TOPICS[..cfg.topics.clamp(1, TOPICS.len())];
    let centroids: Vec<Vec<f64>> = topics.iter().map(|_| gaussian(&mut rng, cfg.dim)).collect();

    let splits = [(Split::Train, cfg.train), (Split::Val, cfg.val), (Split::Test, cfg.test)];
    let mut records = Vec::new();
    let mut embeddings = Vec::new();
    let mut candidates = Vec::new();
    let mut serial = 0usize;
    for (split, count) in splits {
        for _ in 0..count {
            let topic_idx = serial % topics.len();
            let topic = &topics[topic_idx];
            let plan = ImagePlan {
                topic,
                topic_idx,
                subject: topic.subjects.choose(&mut rng).copied().unwrap_or("thing"),
                scene: topic.scenes.choose(&mut rng).copied().unwrap_or("place"),
                color: COLORS.choose(&mut rng).copied().unwrap_or("red"),
                object: OBJECTS.choose(&mut rng).copied().unwrap_or("box"),
            };
            let id = format!("{}{:04}", split.as_str(), serial);
            serial += 1;

            let centroid = &centroids[plan.topic_idx];
            let offset = gaussian(&mut rng, cfg.dim);
            embeddings.push(Embedding::image(&id, mix(&[(1.0, centroid), (0.6, &offset)])));

            let mut captions = Vec::with_capacity(cfg.captions_per_image);
            for c in 0..cfg.captions_per_image {
                let (caption, detailed) = ground_truth(&plan, c, &mut rng);
                let noise = gaussian(&mut rng, cfg.dim);
                let vector = if detailed {
                    mix(&[(1.0, centroid), (0.6, &offset), (0.15, &noise)])
                } else {
                    mix(&[(1.0, centroid), (0.25, &offset), (0.3, &noise)])
                };
                embeddings.push(Embedding::caption(&id, c as i64, vector));
                captions.push(caption);
            }

            let verb = plan.topic.verbs.choose(&mut rng).copied().unwrap_or("standing");
            let generic = format!("a {} {verb} in the {}", plan.subject, plan.scene);
            let specific = format!("a {} with a {} {} in the {}", plan.subject, plan.color, plan.object, plan.scene);
            let (n1, n2) = (gaussian(&mut rng, cfg.dim), gaussian(&mut rng, cfg.dim));
            embeddings.push(Embedding::query(&id, Some("baseline".into()), mix(&[(1.0, centroid), (0.2, &offset), (0.3, &n1)])));
            embeddings.push(Embedding::query(&id, Some("distinct".into()), mix(&[(1.0, centroid), (0.6, &offset), (0.15, &n2)])));
            candidates.push(Candidate { system: "baseline".into(), image_id: id.clone(), caption: generic });
            candidates.push(Candidate { system: "distinct".into(), image_id: id.clone(), caption: specific });

            records.push(ImageRecord { id, split, captions });
        }
    }
    // Baseline lines first, so report systems come out in a fixed order.
    candidates.sort_by_key(|c| c.system != "baseline");

    SyntheticCorpus { dataset: Dataset::new(records).expect("generated ids are unique"), dim: cfg.dim, embeddings, candidates }
}

/// The `index`-th ground truth of an image and whether it names the detail.
fn ground_truth(plan: &ImagePlan<'_>, index: usize, rng: &mut ChaCha8Rng) -> (String, bool) {
    let verb = plan.topic.verbs.choose(rng).copied().unwrap_or("standing");
    let (s, sc, col, obj) = (plan.subject, plan.scene, plan.color, plan.object);
    match index % 5 {
        0 => (format!("a {s} {verb} in the {sc}"), false),
        1 => (format!("a {s} next to a {col} {obj} in the {sc}"), true),
        2 => (format!("the {s} is {verb} near the {sc}"), false),
        3 => (format!("a {col} {obj} beside a {s} {verb}"), true),
        _ => (format!("A {s} at the {sc}."), false),
    }
}
