use super::{EmbeddingBackend, EmbeddingVector};
use crate::error::Result;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// Deterministic hashed bag-of-words encoder: lowercase alphanumeric tokens,
/// FNV-1a hashed into `dim` buckets, L2-normalized.
#[derive(Clone, Debug)]
pub struct HashedBagOfWords {
    dim: usize,
    seed: u64,
}

impl HashedBagOfWords {
    pub fn new(dim: usize, seed: u64) -> Self {
        assert!(dim > 0, "embedding dimension must be positive");
        Self { dim, seed }
    }

    pub fn bucket(&self, token: &str) -> usize {
        let mut h = FNV_OFFSET;
        for b in self.seed.to_le_bytes().iter().chain(token.as_bytes()) {
            h ^= u64::from(*b);
            h = h.wrapping_mul(FNV_PRIME);
        }
        (h % self.dim as u64) as usize
    }

    pub fn tokens(text: &str) -> impl Iterator<Item = String> + '_ {
        text.split(|c: char| !c.is_alphanumeric())
            .filter(|t| !t.is_empty())
            .map(str::to_lowercase)
    }
}

impl Default for HashedBagOfWords {
    fn default() -> Self {
        Self::new(512, 0x5eed)
    }
}

impl EmbeddingBackend for HashedBagOfWords {
    fn name(&self) -> &str {
        "hashed-bow"
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn embed_text(&self, text: &str) -> Result<EmbeddingVector> {
        let mut values = vec![0.0; self.dim];
        for token in Self::tokens(text) {
            values[self.bucket(&token)] += 1.0;
        }
        let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            values.iter_mut().for_each(|v| *v /= norm);
        }
        EmbeddingVector::new(values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::retrieval::{cosine, embed};

    #[test]
    fn repeated_words_keep_direction() {
        let b = HashedBagOfWords::default();
        let c = cosine(&embed(&b, "x x").unwrap(), &embed(&b, "x").unwrap()).unwrap();
        assert!((c - 1.0).abs() < 1e-12);
    }

    #[test]
    fn deterministic_and_normalized() {
        let b = HashedBagOfWords::default();
        let v1 = embed(&b, "Methods were used.").unwrap();
        let v2 = embed(&b, "Methods were used.").unwrap();
        assert_eq!(v1, v2);
        assert!((v1.norm() - 1.0).abs() < 1e-12);
        assert_eq!(v1.dim(), 512);
    }

    #[test]
    fn sparse_dot_product_matches_word_overlap() {
        let b = HashedBagOfWords::default();
        // Hand oracle: {methods, were, used} vs {results, were, found} share
        // one word, so cosine = 1 / (sqrt(3) * sqrt(3)) provided the five
        // distinct words land in distinct buckets.
        let words = ["methods", "were", "used", "results", "found"];
        let mut buckets: Vec<usize> = words.iter().map(|w| b.bucket(w)).collect();
        buckets.sort_unstable();
        buckets.dedup();
        assert_eq!(buckets.len(), 5);
        let c = cosine(
            &embed(&b, "methods were used").unwrap(),
            &embed(&b, "results were found").unwrap(),
        )
        .unwrap();
        assert!((c - 1.0 / 3.0).abs() < 1e-12);
    }
}
