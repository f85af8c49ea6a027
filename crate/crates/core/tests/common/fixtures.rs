//! Shared embedding fixtures built with the library's store.

use ciderbtw::retrieval::{Embedding, EmbeddingStore};
use rand::Rng;
use rand_distr::StandardNormal;

use super::widen;

pub type Images = Vec<(String, Vec<f64>)>;
pub type Captions = Vec<(String, usize, Vec<f64>)>;

pub fn store_and_tables(dim: usize, embeddings: &[Embedding]) -> (EmbeddingStore, Images, Captions) {
    let store = EmbeddingStore::new(dim, embeddings.to_vec()).unwrap();
    let mut images = Vec::new();
    let mut captions = Vec::new();
    for e in embeddings {
        match e.caption_index {
            None => images.push((e.id.clone(), widen(&e.vector))),
            Some(i) => captions.push((e.id.clone(), i as usize, widen(&e.vector))),
        }
    }
    (store, images, captions)
}

/// Eight images on four axes: pairs share an axis, and one caption of each
/// image leans towards the next pair.
pub fn eight_image_fixture() -> Vec<Embedding> {
    let images: [[f32; 4]; 8] = [
        [1.0, 0.1, 0.0, 0.0],
        [0.9, 0.0, 0.2, 0.0],
        [0.0, 1.0, 0.1, 0.0],
        [0.1, 0.9, 0.0, 0.1],
        [0.0, 0.0, 1.0, 0.2],
        [0.0, 0.2, 0.9, 0.0],
        [0.1, 0.0, 0.0, 1.0],
        [0.0, 0.0, 0.3, 0.8],
    ];
    let mut out = Vec::new();
    for (i, v) in images.iter().enumerate() {
        let id = format!("img{i}");
        out.push(Embedding::image(&id, v.to_vec()));
        out.push(Embedding::caption(&id, 0, v.iter().map(|x| x + 0.05).collect()));
        let mut lean = v.to_vec();
        lean[(i / 2 + 1) % 4] += 0.6;
        out.push(Embedding::caption(&id, 1, lean));
    }
    out
}

/// Ten images, one query each; queries 3, 6 and 8 are pulled towards other
/// images, and query 9 sits halfway between its image and image 0.
pub fn ten_image_fixture() -> (Vec<Embedding>, Vec<(Vec<f32>, String)>) {
    let mut images = Vec::new();
    let mut queries = Vec::new();
    for i in 0..10usize {
        let mut v = vec![0.1f32; 5];
        v[i % 5] = 1.0 + (i / 5) as f32;
        v[(i + 1) % 5] = if i >= 5 { 0.8 } else { 0.3 };
        images.push(v);
    }
    for (i, v) in images.iter().enumerate() {
        let q: Vec<f32> = match i {
            3 => v.iter().zip(&images[4]).map(|(a, b)| 0.3 * a + b).collect(),
            6 => v.iter().zip(&images[1]).map(|(a, b)| 0.6 * a + b).collect(),
            8 => v.iter().zip(&images[2]).map(|(a, b)| 0.5 * a + 0.9 * b).collect(),
            9 => v.iter().zip(&images[0]).map(|(a, b)| 0.5 * a + 0.5 * b).collect(),
            _ => v.iter().map(|x| x + 0.01).collect(),
        };
        queries.push((q, format!("im{i}")));
    }
    let emb = images.iter().enumerate().map(|(i, v)| Embedding::image(format!("im{i}"), v.clone())).collect();
    (emb, queries)
}

/// Up to `max_images` Gaussian images, each with 1 to 5 noisy captions.
pub fn random_store(rng: &mut impl Rng, max_images: usize) -> (usize, Vec<Embedding>) {
    let dim = rng.gen_range(2..=12);
    let n_images = rng.gen_range(2..=max_images);
    let offset = rng.gen_range(0..1000);
    let mut emb = Vec::new();
    for i in 0..n_images {
        let id = format!("{:04}", (i * 37 + offset) % 10_000);
        let v: Vec<f32> = (0..dim).map(|_| rng.sample::<f32, _>(StandardNormal)).collect();
        emb.push(Embedding::image(&id, v.clone()));
        for c in 0..rng.gen_range(1..=5) {
            let cv: Vec<f32> = v.iter().map(|x| x + 0.7 * rng.sample::<f32, _>(StandardNormal)).collect();
            emb.push(Embedding::caption(&id, c, cv));
        }
    }
    (dim, emb)
}
