use std::collections::HashMap;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{EmbeddingBackend, EmbeddingVector};
use crate::error::{Error, Result};

#[derive(Serialize, Deserialize)]
struct CacheLine {
    text_hash: String,
    vector: Vec<f64>,
}

/// Memoizing wrapper around an embedding backend, persisted as JSONL lines of
/// `{"text_hash": <sha256 hex>, "vector": [...]}`.
pub struct CachedEmbedding<B> {
    inner: B,
    entries: Mutex<HashMap<String, Vec<f64>>>,
}

pub fn text_hash(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

impl<B: EmbeddingBackend> CachedEmbedding<B> {
    pub fn new(inner: B) -> Self {
        Self {
            inner,
            entries: Mutex::new(HashMap::new()),
        }
    }

    /// Loads cached vectors; a missing file is an empty cache.
    pub fn load(inner: B, path: impl AsRef<Path>) -> Result<Self> {
        let cache = Self::new(inner);
        let path = path.as_ref();
        if !path.exists() {
            return Ok(cache);
        }
        let reader = BufReader::new(fs::File::open(path)?);
        let mut entries = cache.entries.lock().unwrap();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let parsed: CacheLine = serde_json::from_str(&line).map_err(|e| Error::Malformed {
                line: i + 1,
                message: e.to_string(),
            })?;
            if parsed.vector.len() != cache.inner.dim() {
                return Err(Error::Shape(format!(
                    "cache line {} has dimension {}",
                    i + 1,
                    parsed.vector.len()
                )));
            }
            entries.insert(parsed.text_hash, parsed.vector);
        }
        drop(entries);
        Ok(cache)
    }

    /// Writes all entries sorted by hash, so the file is byte-stable.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let entries = self.entries.lock().unwrap();
        let mut keys: Vec<&String> = entries.keys().collect();
        keys.sort();
        let mut file = fs::File::create(path)?;
        for key in keys {
            let line = CacheLine {
                text_hash: key.clone(),
                vector: entries[key].clone(),
            };
            writeln!(file, "{}", serde_json::to_string(&line)?)?;
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.entries.lock().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn inner(&self) -> &B {
        &self.inner
    }
}

impl<B: EmbeddingBackend> EmbeddingBackend for CachedEmbedding<B> {
    fn name(&self) -> &str {
        self.inner.name()
    }

    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn embed_text(&self, text: &str) -> Result<EmbeddingVector> {
        let key = text_hash(text);
        if let Some(v) = self.entries.lock().unwrap().get(&key) {
            return EmbeddingVector::new(v.clone());
        }
        let v = self.inner.embed_text(text)?;
        self.entries
            .lock()
            .unwrap()
            .insert(key, v.values().to_vec());
        Ok(v)
    }
}
