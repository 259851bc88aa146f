use std::time::Duration;

use serde::Serialize;

use super::{ByteTokenizer, GenerationResult, LanguageModel, ParameterGroup, Tokenizer};
use crate::error::{Error, Result};
use crate::prompting::TokenCounter;

#[derive(Serialize)]
struct GenerateRequest<'a> {
    model: &'a str,
    prompt: &'a str,
    n: usize,
}

/// Language model served over HTTP.
///
/// Protocol: `POST <endpoint>` with `{"model", "prompt", "n"}`, answered by a
/// [`GenerationResult`] object `{"token_ids", "hidden_states", "decoded"}`.
/// Prompt budgets are counted in bytes, which never undercounts a subword
/// tokenizer. The hidden width is probed once at connect time.
pub struct ExternalLm {
    endpoint: String,
    model: String,
    agent: ureq::Agent,
    d_model: usize,
    context_limit: usize,
    tokenizer: ByteTokenizer,
}

impl ExternalLm {
    pub fn connect(endpoint: &str, model: &str, context_limit: usize) -> Result<Self> {
        let config = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(300)))
            .build();
        let mut lm = Self {
            endpoint: endpoint.to_string(),
            model: model.to_string(),
            agent: ureq::Agent::new_with_config(config),
            d_model: 0,
            context_limit,
            tokenizer: ByteTokenizer,
        };
        let probe = lm.request("<Start>", 1)?;
        lm.d_model = probe.hidden_states.first().map_or(0, Vec::len);
        if lm.d_model == 0 {
            return Err(Error::Backend(format!("{endpoint} returned no hidden state")));
        }
        Ok(lm)
    }

    fn request(&self, prompt: &str, n: usize) -> Result<GenerationResult> {
        let out: GenerationResult = self
            .agent
            .post(&self.endpoint)
            .send_json(GenerateRequest {
                model: &self.model,
                prompt,
                n,
            })
            .and_then(|mut r| r.body_mut().read_json())
            .map_err(|e| Error::Backend(format!("{}: {e}", self.endpoint)))?;
        if out.token_ids.len() != n || out.hidden_states.len() != n {
            return Err(Error::Backend(format!(
                "{} returned {} tokens and {} hidden states for n = {n}",
                self.endpoint,
                out.token_ids.len(),
                out.hidden_states.len()
            )));
        }
        if out.hidden_states.iter().flatten().any(|h| !h.is_finite()) {
            return Err(Error::NonFinite("external hidden states".into()));
        }
        Ok(out)
    }
}

impl LanguageModel for ExternalLm {
    fn name(&self) -> &str {
        &self.model
    }

    fn d_model(&self) -> usize {
        self.d_model
    }

    fn tokenizer(&self) -> &dyn Tokenizer {
        &self.tokenizer
    }

    fn context_limit(&self) -> usize {
        self.context_limit
    }

    fn generate(&self, prompt: &str, n: usize) -> Result<GenerationResult> {
        if n == 0 {
            return Err(Error::InvalidArgument("must generate at least one token".into()));
        }
        let len = self.tokenizer.count(prompt);
        if len > self.context_limit {
            return Err(Error::ContextOverflow {
                len,
                limit: self.context_limit,
            });
        }
        let out = self.request(prompt, n)?;
        if out.hidden_states.iter().any(|h| h.len() != self.d_model) {
            return Err(Error::Backend("hidden width changed between calls".into()));
        }
        Ok(out)
    }

    /// The remote side owns its parameters; nothing is trainable locally.
    fn parameter_groups(&self) -> Vec<ParameterGroup> {
        Vec::new()
    }
}
