use serde::{Deserialize, Serialize};

use super::Corpus;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabelCount {
    pub label: String,
    pub count: usize,
}

/// Descriptive statistics of a corpus. Standard deviations are population
/// standard deviations; sentence length counts whitespace tokens.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub n_docs: usize,
    pub n_sentences: usize,
    pub n_multilabel_sentences: usize,
    pub n_structured_docs: usize,
    pub label_counts: Vec<LabelCount>,
    pub doc_length_mean: f64,
    pub doc_length_std: f64,
    pub sentence_length_mean: f64,
    pub sentence_length_std: f64,
}

impl CorpusStats {
    /// Share of sentences carrying label `c`, in percent.
    pub fn label_percentage(&self, c: usize) -> f64 {
        100.0 * self.label_counts[c].count as f64 / self.n_sentences as f64
    }

    pub fn multilabel_percentage(&self) -> f64 {
        100.0 * self.n_multilabel_sentences as f64 / self.n_sentences as f64
    }

    pub fn to_markdown(&self) -> String {
        let mut out = String::new();
        out.push_str("| Statistic | Value | |\n|---|---|---|\n");
        out.push_str(&format!(
            "| Overall | {} (Sentences) | {} (Docs) |\n",
            self.n_sentences, self.n_docs
        ));
        out.push_str(&format!(
            "| Multi-label Sentences | {} (Sentences) | Percentage: {:.1}% |\n",
            self.n_multilabel_sentences,
            self.multilabel_percentage()
        ));
        out.push_str(&format!(
            "| Doc Length (sentence) | Avg: {:.2} | Std: {:.2} |\n",
            self.doc_length_mean, self.doc_length_std
        ));
        out.push_str(&format!(
            "| Sentence Length (word) | Avg: {:.2} | Std: {:.2} |\n",
            self.sentence_length_mean, self.sentence_length_std
        ));
        for (c, lc) in self.label_counts.iter().enumerate() {
            out.push_str(&format!(
                "| {} | {} | {:.1}% |\n",
                lc.label,
                lc.count,
                self.label_percentage(c)
            ));
        }
        out
    }
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

pub fn corpus_stats(corpus: &Corpus) -> CorpusStats {
    let mut label_counts = vec![0usize; corpus.n_labels()];
    let mut n_multilabel = 0;
    let mut sentence_lengths = Vec::with_capacity(corpus.n_sentences());
    for (_, s) in corpus.sentences() {
        for c in s.gold.indices() {
            label_counts[c] += 1;
        }
        if s.gold.count_ones() >= 2 {
            n_multilabel += 1;
        }
        sentence_lengths.push(s.text.split_whitespace().count() as f64);
    }
    let doc_lengths: Vec<f64> = corpus.documents.iter().map(|d| d.len() as f64).collect();
    let (doc_length_mean, doc_length_std) = mean_std(&doc_lengths);
    let (sentence_length_mean, sentence_length_std) = mean_std(&sentence_lengths);

    CorpusStats {
        n_docs: corpus.documents.len(),
        n_sentences: sentence_lengths.len(),
        n_multilabel_sentences: n_multilabel,
        n_structured_docs: corpus
            .documents
            .iter()
            .filter(|d| d.source_kind == super::SourceKind::Structured)
            .count(),
        label_counts: label_counts
            .into_iter()
            .enumerate()
            .map(|(c, count)| LabelCount {
                label: corpus.label_set.name(c).to_string(),
                count,
            })
            .collect(),
        doc_length_mean,
        doc_length_std,
        sentence_length_mean,
        sentence_length_std,
    }
}
