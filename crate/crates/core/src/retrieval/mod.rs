//! Sentence embeddings and similarity-ranked demonstration retrieval.
//!
//! Documents in the training pool are ranked against a target sentence by the
//! best cosine between the target and any sentence of the document. Ties are
//! broken by `doc_id` so rankings are reproducible.

mod cache;
mod external;
mod hashed;

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::error::{Error, Result};

pub use cache::CachedEmbedding;
pub use external::ExternalEmbedding;
pub use hashed::HashedBagOfWords;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EmbeddingVector(Vec<f64>);

impl EmbeddingVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("embedding".into()));
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self(self.0.iter().map(|v| v * factor).collect())
    }
}

/// A sentence encoder. Implementations must be deterministic: the same text
/// yields the same vector for the lifetime of the backend.
pub trait EmbeddingBackend: Send + Sync {
    fn name(&self) -> &str;
    fn dim(&self) -> usize;
    fn embed_text(&self, text: &str) -> Result<EmbeddingVector>;
}

impl<B: EmbeddingBackend + ?Sized> EmbeddingBackend for Box<B> {
    fn name(&self) -> &str {
        (**self).name()
    }

    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn embed_text(&self, text: &str) -> Result<EmbeddingVector> {
        (**self).embed_text(text)
    }
}

/// Embeds `text`, checking the backend's dimension contract.
pub fn embed(backend: &dyn EmbeddingBackend, text: &str) -> Result<EmbeddingVector> {
    if text.trim().is_empty() {
        return Err(Error::InvalidArgument("cannot embed empty text".into()));
    }
    let v = backend.embed_text(text)?;
    if v.dim() != backend.dim() {
        return Err(Error::Shape(format!(
            "backend `{}` returned dimension {} (expected {})",
            backend.name(),
            v.dim(),
            backend.dim()
        )));
    }
    Ok(v)
}

pub fn cosine(a: &EmbeddingVector, b: &EmbeddingVector) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::Shape(format!(
            "cosine of dimensions {} and {}",
            a.dim(),
            b.dim()
        )));
    }
    let (na, nb) = (a.norm(), b.norm());
    if na == 0.0 || nb == 0.0 {
        return Err(Error::ZeroVector);
    }
    let dot: f64 = a.0.iter().zip(&b.0).map(|(x, y)| x * y).sum();
    Ok((dot / (na * nb)).clamp(-1.0, 1.0))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RankedDocument {
    /// Position of the document in the pool corpus.
    pub pool_index: usize,
    pub doc_id: String,
    /// Best sentence cosine; `None` when no sentence has a usable embedding.
    pub score: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Ranking {
    pub documents: Vec<RankedDocument>,
    /// True when fewer than `k` documents were available.
    pub truncated: bool,
}

/// Pool sentence embeddings computed once and reused across targets.
pub struct DemonstrationIndex<'a> {
    pool: &'a Corpus,
    /// Per document, per sentence; `None` for zero-norm embeddings.
    embeddings: Vec<Vec<Option<EmbeddingVector>>>,
}

impl<'a> DemonstrationIndex<'a> {
    pub fn build(backend: &dyn EmbeddingBackend, pool: &'a Corpus) -> Result<Self> {
        let embeddings = pool
            .documents
            .iter()
            .map(|d| {
                d.sentences
                    .iter()
                    .map(|s| embed(backend, &s.text).map(|v| (v.norm() > 0.0).then_some(v)))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { pool, embeddings })
    }

    pub fn pool(&self) -> &'a Corpus {
        self.pool
    }

    /// Ranks pool documents against an embedded target, skipping `exclude`
    /// (typically the target's own document).
    pub fn rank(&self, target: &EmbeddingVector, k: usize, exclude: Option<&str>) -> Ranking {
        if k == 0 {
            return Ranking {
                documents: Vec::new(),
                truncated: false,
            };
        }
        let usable_target = target.norm() > 0.0;
        let mut scored: Vec<RankedDocument> = self
            .pool
            .documents
            .iter()
            .enumerate()
            .filter(|(_, d)| Some(d.doc_id.as_str()) != exclude)
            .map(|(i, d)| {
                let score = if usable_target {
                    self.embeddings[i]
                        .iter()
                        .flatten()
                        .filter_map(|e| cosine(target, e).ok())
                        .max_by(f64::total_cmp)
                } else {
                    None
                };
                RankedDocument {
                    pool_index: i,
                    doc_id: d.doc_id.clone(),
                    score,
                }
            })
            .collect();
        scored.sort_by(|a, b| match (a.score, b.score) {
            (Some(x), Some(y)) => y.total_cmp(&x),
            (Some(_), None) => Ordering::Less,
            (None, Some(_)) => Ordering::Greater,
            (None, None) => Ordering::Equal,
        }
        .then_with(|| a.doc_id.cmp(&b.doc_id)));
        let truncated = scored.len() < k;
        scored.truncate(k);
        Ranking {
            documents: scored,
            truncated,
        }
    }
}

/// Ranks `pool` documents as demonstrations for `target_text`, returning at
/// most `k` of them.
pub fn rank_demonstrations(
    backend: &dyn EmbeddingBackend,
    target_text: &str,
    pool: &Corpus,
    k: usize,
) -> Result<Ranking> {
    if k == 0 {
        return Ok(Ranking {
            documents: Vec::new(),
            truncated: false,
        });
    }
    if pool.is_empty() {
        return Err(Error::InvalidArgument(
            "demonstration pool is empty".into(),
        ));
    }
    let index = DemonstrationIndex::build(backend, pool)?;
    let target = embed(backend, target_text)?;
    Ok(index.rank(&target, k, None))
}

/// Parses the `--embed-backend` flag: `hashed-bow` or `external:<endpoint>`.
pub fn backend_from_spec(spec: &str) -> Result<Box<dyn EmbeddingBackend>> {
    if spec == "hashed-bow" {
        return Ok(Box::new(HashedBagOfWords::default()));
    }
    if let Some(endpoint) = spec.strip_prefix("external:") {
        return Ok(Box::new(ExternalEmbedding::connect(endpoint)?));
    }
    Err(Error::InvalidArgument(format!(
        "unknown embedding backend `{spec}` (expected hashed-bow or external:<endpoint>)"
    )))
}
