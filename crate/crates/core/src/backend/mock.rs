use std::collections::HashMap;

use super::{ByteTokenizer, GenerationResult, LanguageModel, ParameterGroup, Tokenizer, EOS};
use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::prompting::{render_query, SEPARATOR};

/// Test backend that answers every query with its gold label text.
///
/// The prompt's final line is looked up among the rendered queries of a
/// corpus and answered with `<LABELS> <End>`, encoded with the byte tokenizer
/// and padded with EOS (or cut) to exactly `n` tokens. Hidden states are zero.
pub struct GoldEchoBackend {
    answers: HashMap<String, String>,
    d_model: usize,
    tokenizer: ByteTokenizer,
}

impl GoldEchoBackend {
    pub fn from_corpus(corpus: &Corpus) -> Result<Self> {
        let mut answers = HashMap::new();
        for (doc, s) in corpus.sentences() {
            let query = render_query(doc, s.index, &corpus.label_set)?;
            let answer = format!("<{}> <End>", s.gold.names(&corpus.label_set).join(", "));
            answers.entry(query).or_insert(answer);
        }
        Ok(Self {
            answers,
            d_model: 8,
            tokenizer: ByteTokenizer,
        })
    }
}

impl LanguageModel for GoldEchoBackend {
    fn name(&self) -> &str {
        "gold-echo"
    }

    fn d_model(&self) -> usize {
        self.d_model
    }

    fn tokenizer(&self) -> &dyn Tokenizer {
        &self.tokenizer
    }

    fn context_limit(&self) -> usize {
        usize::MAX
    }

    fn generate(&self, prompt: &str, n: usize) -> Result<GenerationResult> {
        if n == 0 {
            return Err(Error::InvalidArgument("must generate at least one token".into()));
        }
        let query = prompt.rsplit(SEPARATOR).next().unwrap_or(prompt);
        let answer = self
            .answers
            .get(query)
            .ok_or_else(|| Error::Backend("gold-echo: unknown query".into()))?;
        let mut token_ids: Vec<u32> = answer.bytes().map(u32::from).collect();
        token_ids.resize(n, EOS);
        Ok(GenerationResult {
            decoded: self.tokenizer.decode(&token_ids),
            hidden_states: vec![vec![0.0; self.d_model]; n],
            token_ids,
        })
    }

    fn parameter_groups(&self) -> Vec<ParameterGroup> {
        Vec::new()
    }
}
