use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::metrics::{f1_scores, EvalReport};
use crate::backend::LanguageModel;
use crate::corpus::{Corpus, LabelMode, LabelVector};
use crate::error::Result;
use crate::prompting::{assemble_prompt, parse_generated_label};
use crate::retrieval::{embed, DemonstrationIndex, EmbeddingBackend};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IclConfig {
    pub shots: usize,
    /// Tokens generated per query; enough to spell the label text.
    pub max_new_tokens: usize,
    pub token_budget: usize,
    pub mode: LabelMode,
}

impl Default for IclConfig {
    fn default() -> Self {
        Self {
            shots: 1,
            max_new_tokens: 48,
            token_budget: 8192,
            mode: LabelMode::Multi,
        }
    }
}

/// One evaluated sentence.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub doc_id: String,
    pub index: usize,
    pub prompt_hash: String,
    pub generated: String,
    /// Label names read from the generation; `None` on a parse failure.
    pub parsed: Option<Vec<String>>,
    pub gold: Vec<String>,
}

pub fn prompt_hash(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

/// Few-shot evaluation of `test` with demonstrations retrieved from `train`.
///
/// Every trace record is passed to `on_trace` as soon as it exists, so a
/// backend failure still leaves the records written so far. Unparseable
/// generations predict the training majority label and are counted.
pub fn run_icl(
    test: &Corpus,
    train: &Corpus,
    backend: &dyn LanguageModel,
    embedder: &dyn EmbeddingBackend,
    config: &IclConfig,
    on_trace: &mut dyn FnMut(&TraceRecord) -> Result<()>,
) -> Result<EvalReport> {
    let labels = &test.label_set;
    let m = labels.len();
    let fallback = LabelVector::one_hot(m, train.majority_label());
    let index = DemonstrationIndex::build(embedder, train)?;
    // Leave room for the generated tokens inside the backend's context.
    let budget = config
        .token_budget
        .min(backend.context_limit().saturating_sub(config.max_new_tokens.saturating_sub(1)));
    let mut pred = Vec::new();
    let mut gold = Vec::new();
    let mut failures = 0;
    for (doc, s) in test.sentences() {
        let ranking = if config.shots == 0 {
            Vec::new()
        } else {
            let target = embed(embedder, &s.text)?;
            index.rank(&target, config.shots, Some(&doc.doc_id)).documents
        };
        let demos: Vec<_> = ranking.iter().map(|r| &train.documents[r.pool_index]).collect();
        let prompt = assemble_prompt(&demos, doc, s.index, labels, budget, backend.tokenizer())?;
        let out = backend.generate(&prompt.text, config.max_new_tokens)?;
        let parsed = parse_generated_label(&out.decoded, labels, config.mode).ok();
        on_trace(&TraceRecord {
            doc_id: doc.doc_id.clone(),
            index: s.index,
            prompt_hash: prompt_hash(&prompt.text),
            generated: out.decoded.clone(),
            parsed: parsed.as_ref().map(|v| v.names(labels).iter().map(|n| n.to_string()).collect()),
            gold: s.gold.names(labels).iter().map(|n| n.to_string()).collect(),
        })?;
        pred.push(parsed.unwrap_or_else(|| {
            failures += 1;
            fallback.clone()
        }));
        gold.push(s.gold.clone());
    }
    let mut report = f1_scores(&pred, &gold, labels)?;
    report.n_parse_failures = failures;
    Ok(report.with_config(serde_json::json!({
        "shots": config.shots,
        "max_new_tokens": config.max_new_tokens,
        "token_budget": config.token_budget,
        "mode": config.mode,
        "backend": backend.name(),
        "embed_backend": embedder.name(),
    })))
}
