//! Causal language model backends.
//!
//! A backend decodes greedily and reports, for every generated token, the
//! final-layer hidden state at the position whose logits produced it. The
//! hidden states for `n` generated tokens therefore sit at the last prompt
//! position and the first `n - 1` generated positions.

mod external;
pub mod linalg;
mod mock;
mod tokenizer;
mod toy;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::prompting::TokenCounter;

pub use external::ExternalLm;
pub use mock::GoldEchoBackend;
pub use tokenizer::{ByteTokenizer, BOS, EOS};
pub use toy::{ToyConfig, ToyTrace, ToyTransformer};

/// Encoder/decoder between text and token ids.
pub trait Tokenizer: TokenCounter {
    fn vocab_size(&self) -> usize;
    fn encode(&self, text: &str) -> Vec<u32>;
    fn decode(&self, ids: &[u32]) -> String;
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenerationResult {
    pub token_ids: Vec<u32>,
    /// One final-layer state of width `d_model` per generated token.
    pub hidden_states: Vec<Vec<f32>>,
    pub decoded: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParameterGroup {
    pub name: String,
    pub count: usize,
    pub frozen: bool,
}

pub trait LanguageModel: Send + Sync {
    fn name(&self) -> &str;
    fn d_model(&self) -> usize;
    fn tokenizer(&self) -> &dyn Tokenizer;
    fn context_limit(&self) -> usize;

    /// Greedily decodes exactly `n` tokens after `prompt`.
    fn generate(&self, prompt: &str, n: usize) -> Result<GenerationResult>;

    fn parameter_groups(&self) -> Vec<ParameterGroup>;
}

/// Listing of a backend's parameter groups; the frozen backbone comes first.
pub fn trainable_parameters(model: &dyn LanguageModel) -> Vec<ParameterGroup> {
    model.parameter_groups()
}

/// A backend whose adapter parameters can be trained while the backbone stays
/// frozen.
pub trait TrainableModel: LanguageModel {
    type Trace: Send + Sync;

    /// Like [`LanguageModel::generate`], also returning what the backward
    /// pass needs.
    fn generate_traced(&self, prompt: &str, n: usize) -> Result<(GenerationResult, Self::Trace)>;

    /// Gradient of a scalar loss with respect to the flat adapter parameters,
    /// given the loss gradient at each generated hidden state.
    fn adapter_gradient(&self, trace: &Self::Trace, d_hidden: &[Vec<f32>]) -> Result<Vec<f32>>;

    fn adapter_parameters(&self) -> &[f32];
    fn adapter_parameters_mut(&mut self) -> &mut [f32];

    /// Copy of every frozen backbone parameter, for bitwise comparisons.
    fn backbone_snapshot(&self) -> Vec<f32>;
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum BackendConfig {
    Toy(ToyConfig),
    External {
        endpoint: String,
        model: String,
        #[serde(default = "default_external_context")]
        context_limit: usize,
    },
    /// Test backend answering with the gold labels of the evaluated corpus.
    #[serde(rename = "gold-echo")]
    GoldEcho,
}

fn default_external_context() -> usize {
    8192
}

impl Default for BackendConfig {
    fn default() -> Self {
        BackendConfig::Toy(ToyConfig::default())
    }
}
