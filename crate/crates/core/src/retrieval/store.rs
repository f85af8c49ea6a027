use std::collections::{BTreeMap, HashMap, HashSet};
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Caption index reserved for embeddings of generated (candidate) captions.
pub const QUERY_CAPTION_INDEX: i64 = -1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EmbeddingKind {
    Image,
    Caption,
}

/// A joint-space vector for an image, one of its captions, or a generated
/// caption (`caption_index == -1`, optionally tagged with a system name).
#[derive(Clone, Debug, PartialEq)]
pub struct Embedding {
    pub id: String,
    pub kind: EmbeddingKind,
    pub caption_index: Option<i64>,
    pub system: Option<String>,
    pub vector: Vec<f32>,
}

impl Embedding {
    pub fn image(id: impl Into<String>, vector: Vec<f32>) -> Self {
        Embedding { id: id.into(), kind: EmbeddingKind::Image, caption_index: None, system: None, vector }
    }

    pub fn caption(id: impl Into<String>, caption_index: i64, vector: Vec<f32>) -> Self {
        Embedding { id: id.into(), kind: EmbeddingKind::Caption, caption_index: Some(caption_index), system: None, vector }
    }

    pub fn query(id: impl Into<String>, system: Option<String>, vector: Vec<f32>) -> Self {
        Embedding { system, ..Embedding::caption(id, QUERY_CAPTION_INDEX, vector) }
    }
}

/// `dot(a, b) / (|a| |b|)`, accumulated in `f64` and clamped to `[-1, 1]`.
pub fn cosine(a: &[f32], b: &[f32]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch { line: None, expected: a.len(), found: b.len() });
    }
    Ok(cosine_with_norms(a, norm(a), b, norm(b)))
}

pub(crate) fn norm(v: &[f32]) -> f64 {
    v.iter().map(|&x| f64::from(x) * f64::from(x)).sum::<f64>().sqrt()
}

pub(crate) fn cosine_with_norms(a: &[f32], na: f64, b: &[f32], nb: f64) -> f64 {
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    let dot: f64 = a.iter().zip(b).map(|(&x, &y)| f64::from(x) * f64::from(y)).sum();
    (dot / (na * nb)).clamp(-1.0, 1.0)
}

#[derive(Clone, Debug, PartialEq)]
pub(crate) struct CaptionEntry {
    pub image: usize,
    pub caption_index: u32,
}

/// Unit-normalized image, caption and query embeddings of one joint space.
///
/// Images are kept sorted by id and captions by `(image id, caption index)`,
/// so a scan in storage order is also a scan in tie-break order.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingStore {
    dim: usize,
    image_ids: Vec<String>,
    image_index: HashMap<String, usize>,
    image_vecs: Vec<f32>,
    image_norms: Vec<f64>,
    captions: Vec<CaptionEntry>,
    caption_vecs: Vec<f32>,
    caption_norms: Vec<f64>,
    caption_ranges: Vec<Range<usize>>,
    queries: BTreeMap<(Option<String>, String), Vec<f32>>,
}

fn normalized(v: &[f32], line: usize) -> Result<Vec<f32>> {
    let n = norm(v);
    if n == 0.0 || !n.is_finite() {
        return Err(Error::ZeroVector { line });
    }
    Ok(v.iter().map(|&x| (f64::from(x) / n) as f32).collect())
}

impl EmbeddingStore {
    /// Builds a store from embeddings numbered by position (1-based) for errors.
    pub fn new(dim: usize, embeddings: Vec<Embedding>) -> Result<Self> {
        Self::from_numbered(dim, embeddings.into_iter().enumerate().map(|(i, e)| (i + 1, e)).collect())
    }

    /// Builds a store from `(line, embedding)` pairs; `line` only labels errors.
    pub fn from_numbered(dim: usize, embeddings: Vec<(usize, Embedding)>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParams("embedding dimension must be positive".into()));
        }
        let mut images: BTreeMap<String, Vec<f32>> = BTreeMap::new();
        let mut captions: Vec<(usize, String, u32, Vec<f32>)> = Vec::new();
        let mut queries = BTreeMap::new();
        let mut seen_captions = HashSet::new();
        for (line, e) in embeddings {
            if e.vector.len() != dim {
                return Err(Error::DimensionMismatch { line: Some(line), expected: dim, found: e.vector.len() });
            }
            let v = normalized(&e.vector, line)?;
            match (e.kind, e.caption_index) {
                (EmbeddingKind::Image, None) => {
                    if images.insert(e.id.clone(), v).is_some() {
                        return Err(Error::DuplicateId(e.id));
                    }
                }
                (EmbeddingKind::Image, Some(_)) => {
                    return Err(Error::parse(Some(line), "image embedding must not carry caption_index"));
                }
                (EmbeddingKind::Caption, None) => {
                    return Err(Error::parse(Some(line), "caption embedding requires caption_index"));
                }
                (EmbeddingKind::Caption, Some(QUERY_CAPTION_INDEX)) => {
                    if queries.insert((e.system.clone(), e.id.clone()), v).is_some() {
                        return Err(Error::DuplicateId(format!("{} (query)", e.id)));
                    }
                    captions.push((line, e.id, u32::MAX, Vec::new()));
                }
                (EmbeddingKind::Caption, Some(idx)) => {
                    let idx = u32::try_from(idx).map_err(|_| Error::parse(Some(line), format!("invalid caption_index {idx}")))?;
                    if !seen_captions.insert((e.id.clone(), idx)) {
                        return Err(Error::DuplicateId(format!("{}#{idx}", e.id)));
                    }
                    captions.push((line, e.id, idx, v));
                }
            }
        }
        if let Some((line, id, ..)) = captions.iter().find(|(_, id, ..)| !images.contains_key(id)) {
            return Err(Error::OrphanCaption { line: *line, id: id.clone() });
        }
        // Query placeholders were only kept for the orphan check.
        captions.retain(|c| c.2 != u32::MAX);

        let image_ids: Vec<String> = images.keys().cloned().collect();
        let image_index: HashMap<String, usize> = image_ids.iter().enumerate().map(|(i, id)| (id.clone(), i)).collect();
        let mut image_vecs = Vec::with_capacity(images.len() * dim);
        let mut image_norms = Vec::with_capacity(images.len());
        for v in images.values() {
            image_norms.push(norm(v));
            image_vecs.extend_from_slice(v);
        }

        captions.sort_by(|a, b| (image_index[&a.1], a.2).cmp(&(image_index[&b.1], b.2)));
        let mut entries = Vec::with_capacity(captions.len());
        let mut caption_vecs = Vec::with_capacity(captions.len() * dim);
        let mut caption_norms = Vec::with_capacity(captions.len());
        let mut caption_ranges = vec![0..0; image_ids.len()];
        for (pos, (_, id, idx, v)) in captions.into_iter().enumerate() {
            let image = image_index[&id];
            let range = &mut caption_ranges[image];
            if range.start == range.end {
                *range = pos..pos + 1;
            } else {
                range.end = pos + 1;
            }
            entries.push(CaptionEntry { image, caption_index: idx });
            caption_norms.push(norm(&v));
            caption_vecs.extend_from_slice(&v);
        }

        Ok(EmbeddingStore {
            dim,
            image_ids,
            image_index,
            image_vecs,
            image_norms,
            captions: entries,
            caption_vecs,
            caption_norms,
            caption_ranges,
            queries,
        })
    }

    pub fn dimension(&self) -> usize {
        self.dim
    }

    pub fn num_images(&self) -> usize {
        self.image_ids.len()
    }

    pub fn num_captions(&self) -> usize {
        self.captions.len()
    }

    pub fn num_queries(&self) -> usize {
        self.queries.len()
    }

    /// Image ids in ascending order.
    pub fn image_ids(&self) -> &[String] {
        &self.image_ids
    }

    pub fn contains_image(&self, id: &str) -> bool {
        self.image_index.contains_key(id)
    }

    pub(crate) fn image_pos(&self, id: &str) -> Result<usize> {
        self.image_index.get(id).copied().ok_or_else(|| Error::UnknownId(id.to_owned()))
    }

    pub fn image_vector(&self, id: &str) -> Option<&[f32]> {
        self.image_index.get(id).map(|&i| self.image_at(i))
    }

    pub(crate) fn image_at(&self, pos: usize) -> &[f32] {
        &self.image_vecs[pos * self.dim..(pos + 1) * self.dim]
    }

    pub(crate) fn image_norm(&self, pos: usize) -> f64 {
        self.image_norms[pos]
    }

    pub(crate) fn caption_at(&self, pos: usize) -> &[f32] {
        &self.caption_vecs[pos * self.dim..(pos + 1) * self.dim]
    }

    pub(crate) fn caption_norm(&self, pos: usize) -> f64 {
        self.caption_norms[pos]
    }

    pub(crate) fn caption_entry(&self, pos: usize) -> &CaptionEntry {
        &self.captions[pos]
    }

    /// Storage positions of an image's caption embeddings.
    pub(crate) fn caption_range(&self, image_pos: usize) -> Range<usize> {
        self.caption_ranges[image_pos].clone()
    }

    pub fn caption_vector(&self, id: &str, caption_index: u32) -> Option<&[f32]> {
        let pos = *self.image_index.get(id)?;
        self.caption_range(pos).find(|&c| self.captions[c].caption_index == caption_index).map(|c| self.caption_at(c))
    }

    pub fn num_captions_of(&self, id: &str) -> usize {
        self.image_index.get(id).map_or(0, |&i| self.caption_ranges[i].len())
    }

    /// Embedding of a generated caption for image `id`. A query tagged
    /// with `system` wins over an untagged one.
    pub fn query_vector(&self, system: Option<&str>, id: &str) -> Option<&[f32]> {
        system
            .and_then(|s| self.queries.get(&(Some(s.to_owned()), id.to_owned())))
            .or_else(|| self.queries.get(&(None, id.to_owned())))
            .map(Vec::as_slice)
    }

    /// A store holding only the listed images, their captions and queries.
    pub fn restrict_to<S: AsRef<str>>(&self, ids: &[S]) -> Result<Self> {
        let mut keep: HashSet<&str> = HashSet::new();
        let mut out = Vec::new();
        for id in ids.iter().map(AsRef::as_ref) {
            if !keep.insert(id) {
                continue;
            }
            let pos = self.image_pos(id)?;
            out.push(Embedding::image(id, self.image_at(pos).to_vec()));
            for c in self.caption_range(pos) {
                out.push(Embedding::caption(id, i64::from(self.captions[c].caption_index), self.caption_at(c).to_vec()));
            }
        }
        for ((system, id), v) in &self.queries {
            if keep.contains(id.as_str()) {
                out.push(Embedding::query(id.clone(), system.clone(), v.clone()));
            }
        }
        EmbeddingStore::new(self.dim, out)
    }
}
