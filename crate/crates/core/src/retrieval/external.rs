use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{EmbeddingBackend, EmbeddingVector};
use crate::error::{Error, Result};

#[derive(Serialize)]
struct EmbedRequest<'a> {
    text: &'a str,
}

#[derive(Deserialize)]
struct EmbedResponse {
    embedding: Vec<f64>,
}

/// Sentence encoder served over HTTP.
///
/// Protocol: `POST <endpoint>` with `{"text": "..."}`, answered by
/// `{"embedding": [f64, ...]}`. The dimension is probed once at connect time.
pub struct ExternalEmbedding {
    endpoint: String,
    agent: ureq::Agent,
    dim: usize,
    name: String,
}

impl ExternalEmbedding {
    pub fn connect(endpoint: &str) -> Result<Self> {
        let config = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(60)))
            .build();
        let mut backend = Self {
            endpoint: endpoint.to_string(),
            agent: ureq::Agent::new_with_config(config),
            dim: 0,
            name: format!("external:{endpoint}"),
        };
        backend.dim = backend.request("dimension probe")?.len();
        if backend.dim == 0 {
            return Err(Error::Backend(format!("{endpoint} returned an empty embedding")));
        }
        Ok(backend)
    }

    fn request(&self, text: &str) -> Result<Vec<f64>> {
        let response: EmbedResponse = self
            .agent
            .post(&self.endpoint)
            .send_json(EmbedRequest { text })
            .and_then(|mut r| r.body_mut().read_json())
            .map_err(|e| Error::Backend(format!("{}: {e}", self.endpoint)))?;
        Ok(response.embedding)
    }
}

impl EmbeddingBackend for ExternalEmbedding {
    fn name(&self) -> &str {
        &self.name
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn embed_text(&self, text: &str) -> Result<EmbeddingVector> {
        EmbeddingVector::new(self.request(text)?)
    }
}
