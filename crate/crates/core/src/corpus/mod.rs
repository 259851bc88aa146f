//! Multi-label sequential-sentence corpora.
//!
//! A [`Corpus`] is an ordered collection of [`Document`]s, each an ordered list
//! of [`Sentence`]s carrying a multi-hot [`LabelVector`] over a fixed
//! [`LabelSet`]. The label set order defines the vector index of every label
//! for the lifetime of a run.

mod io;
mod kappa;
mod split;
mod stats;
pub mod synthetic;

use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use io::{load_corpus, parse_corpus, to_jsonl, write_corpus};
pub use kappa::{cohens_kappa, kappa_from_counts, kappa_report, AnnotationRound, KappaReport};
pub use split::stratified_split;
pub use stats::{corpus_stats, CorpusStats, LabelCount};

/// The six rhetorical roles used for biomedical abstracts.
pub const RHETORICAL_LABELS: [&str; 6] = [
    "BACKGROUND",
    "OBJECTIVE",
    "METHODS",
    "RESULTS",
    "CONCLUSIONS",
    "OTHER",
];

/// Ordered, duplicate-free list of label names.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct LabelSet {
    labels: Vec<String>,
    #[serde(skip)]
    index: HashMap<String, usize>,
}

impl LabelSet {
    pub fn new<S: Into<String>>(labels: impl IntoIterator<Item = S>) -> Result<Self> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return Err(Error::InvalidLabelSet("label set is empty".into()));
        }
        let mut index = HashMap::with_capacity(labels.len());
        for (i, name) in labels.iter().enumerate() {
            if name.trim().is_empty() || name.trim() != name {
                return Err(Error::InvalidLabelSet(format!("bad label name `{name}`")));
            }
            // Names are rendered inside `<...>` and joined with ", ".
            if name.contains(['<', '>', ',', '\n']) {
                return Err(Error::InvalidLabelSet(format!(
                    "label `{name}` contains a reserved character"
                )));
            }
            if index.insert(name.clone(), i).is_some() {
                return Err(Error::InvalidLabelSet(format!("duplicate label `{name}`")));
            }
        }
        Ok(Self { labels, index })
    }

    pub fn rhetorical() -> Self {
        Self::new(RHETORICAL_LABELS).expect("static label set is valid")
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn name(&self, index: usize) -> &str {
        &self.labels[index]
    }

    pub fn names(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    /// Builds a gold vector from label names, rejecting unknown names.
    pub fn vector_from_names<S: AsRef<str>>(&self, names: &[S]) -> Result<LabelVector, String> {
        let mut v = LabelVector::zeros(self.len());
        for name in names {
            let name = name.as_ref();
            match self.index_of(name) {
                Some(i) => v.set(i, true),
                None => return Err(name.to_string()),
            }
        }
        Ok(v)
    }

    /// The label set rendered as it appears in prompts: `A, B, C`.
    pub fn joined(&self) -> String {
        self.labels.join(", ")
    }
}

impl TryFrom<Vec<String>> for LabelSet {
    type Error = Error;

    fn try_from(labels: Vec<String>) -> Result<Self> {
        LabelSet::new(labels)
    }
}

impl From<LabelSet> for Vec<String> {
    fn from(set: LabelSet) -> Self {
        set.labels
    }
}

/// Multi-hot vector over a [`LabelSet`].
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LabelVector(Vec<bool>);

impl LabelVector {
    pub fn zeros(m: usize) -> Self {
        Self(vec![false; m])
    }

    pub fn one_hot(m: usize, index: usize) -> Self {
        let mut v = Self::zeros(m);
        v.set(index, true);
        v
    }

    pub fn from_indices(m: usize, indices: &[usize]) -> Self {
        let mut v = Self::zeros(m);
        for &i in indices {
            v.set(i, true);
        }
        v
    }

    pub fn from_bits(bits: Vec<bool>) -> Self {
        Self(bits)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, index: usize) -> bool {
        self.0[index]
    }

    pub fn set(&mut self, index: usize, value: bool) {
        self.0[index] = value;
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn count_ones(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }

    pub fn any(&self) -> bool {
        self.0.iter().any(|&b| b)
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i)
    }

    /// 0/1 encoding, as consumed by the weighting network and the losses.
    pub fn to_f64(&self) -> Vec<f64> {
        self.0.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect()
    }

    pub fn names<'a>(&self, labels: &'a LabelSet) -> Vec<&'a str> {
        self.indices().map(|i| labels.name(i)).collect()
    }
}

impl fmt::Display for LabelVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Whether each sentence carries exactly one label or any non-empty subset.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LabelMode {
    Single,
    #[default]
    Multi,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SourceKind {
    Structured,
    Unstructured,
}

impl SourceKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SourceKind::Structured => "structured",
            SourceKind::Unstructured => "unstructured",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sentence {
    pub text: String,
    pub gold: LabelVector,
    /// 1-based position within the document.
    pub index: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Document {
    pub doc_id: String,
    pub source_kind: SourceKind,
    pub sentences: Vec<Sentence>,
}

impl Document {
    /// Builds a document from `(text, gold)` pairs, normalizing whitespace and
    /// assigning contiguous indices from 1.
    pub fn new(
        doc_id: impl Into<String>,
        source_kind: SourceKind,
        sentences: impl IntoIterator<Item = (String, LabelVector)>,
    ) -> Self {
        let sentences = sentences
            .into_iter()
            .enumerate()
            .map(|(i, (text, gold))| Sentence {
                text: normalize_whitespace(&text),
                gold,
                index: i + 1,
            })
            .collect();
        Self {
            doc_id: doc_id.into(),
            source_kind,
            sentences,
        }
    }

    /// The paragraph context: sentence texts joined by single spaces.
    pub fn context(&self) -> String {
        self.sentences
            .iter()
            .map(|s| s.text.as_str())
            .collect::<Vec<_>>()
            .join(" ")
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }
}

/// Reference to one sentence: `(doc_id, 1-based index)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SentenceRef {
    pub doc_id: String,
    pub index: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Corpus {
    pub label_set: LabelSet,
    pub documents: Vec<Document>,
}

impl Corpus {
    /// Validates documents against the label set and corpus invariants.
    pub fn new(label_set: LabelSet, documents: Vec<Document>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(documents.len());
        for (i, doc) in documents.iter().enumerate() {
            let line = i + 2;
            if !seen.insert(doc.doc_id.as_str()) {
                return Err(Error::DuplicateDocId {
                    line,
                    doc_id: doc.doc_id.clone(),
                });
            }
            if doc.sentences.is_empty() {
                return Err(Error::EmptyDocument {
                    line,
                    doc_id: doc.doc_id.clone(),
                });
            }
            for (j, s) in doc.sentences.iter().enumerate() {
                if s.index != j + 1 {
                    return Err(Error::Malformed {
                        line,
                        message: format!("sentence indices of `{}` are not contiguous", doc.doc_id),
                    });
                }
                if s.text.trim().is_empty() {
                    return Err(Error::Malformed {
                        line,
                        message: format!("empty sentence {} in `{}`", s.index, doc.doc_id),
                    });
                }
                if s.gold.len() != label_set.len() {
                    return Err(Error::Shape(format!(
                        "label vector of length {} for a label set of {}",
                        s.gold.len(),
                        label_set.len()
                    )));
                }
                if !s.gold.any() {
                    return Err(Error::Unlabeled {
                        doc_id: doc.doc_id.clone(),
                        index: s.index,
                    });
                }
            }
        }
        Ok(Self {
            label_set,
            documents,
        })
    }

    pub fn n_labels(&self) -> usize {
        self.label_set.len()
    }

    pub fn n_sentences(&self) -> usize {
        self.documents.iter().map(Document::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn document(&self, doc_id: &str) -> Option<&Document> {
        self.documents.iter().find(|d| d.doc_id == doc_id)
    }

    /// All `(document, sentence)` pairs in corpus order.
    pub fn sentences(&self) -> impl Iterator<Item = (&Document, &Sentence)> {
        self.documents
            .iter()
            .flat_map(|d| d.sentences.iter().map(move |s| (d, s)))
    }

    /// Most frequent gold label (ties go to the lower index).
    pub fn majority_label(&self) -> usize {
        let mut counts = vec![0usize; self.n_labels()];
        for (_, s) in self.sentences() {
            for c in s.gold.indices() {
                counts[c] += 1;
            }
        }
        let mut best = 0;
        for (c, &n) in counts.iter().enumerate() {
            if n > counts[best] {
                best = c;
            }
        }
        best
    }

    /// True if every sentence carries exactly one label.
    pub fn is_single_label(&self) -> bool {
        self.sentences().all(|(_, s)| s.gold.count_ones() == 1)
    }
}

/// Collapses runs of whitespace to single spaces and trims the ends.
pub fn normalize_whitespace(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn label_set_rejects_duplicates_and_reserved_characters() {
        assert!(LabelSet::new(["A", "A"]).is_err());
        assert!(LabelSet::new(Vec::<String>::new()).is_err());
        assert!(LabelSet::new(["A<B"]).is_err());
        assert!(LabelSet::new(["A, B"]).is_err());
        assert!(LabelSet::new([" A"]).is_err());
        let set = LabelSet::rhetorical();
        assert_eq!(set.len(), 6);
        assert_eq!(set.index_of("METHODS"), Some(2));
        assert_eq!(set.index_of("METHOD"), None);
    }

    #[test]
    fn vector_from_names_reports_first_unknown() {
        let set = LabelSet::rhetorical();
        let v = set.vector_from_names(&["RESULTS", "METHODS"]).unwrap();
        assert_eq!(v.indices().collect::<Vec<_>>(), vec![2, 3]);
        assert_eq!(set.vector_from_names(&["METHOD"]).unwrap_err(), "METHOD");
    }

    #[test]
    fn context_joins_sentences_in_order() {
        let m = 6;
        let doc = Document::new(
            "d",
            SourceKind::Unstructured,
            vec![
                ("First  one.".to_string(), LabelVector::one_hot(m, 0)),
                ("Second\tone.".to_string(), LabelVector::one_hot(m, 1)),
            ],
        );
        assert_eq!(doc.context(), "First one. Second one.");
        assert_eq!(doc.sentences[1].index, 2);
    }

    #[test]
    fn corpus_rejects_unlabeled_and_duplicate_documents() {
        let set = LabelSet::rhetorical();
        let doc = |id: &str, gold: LabelVector| {
            Document::new(id, SourceKind::Structured, vec![("x".to_string(), gold)])
        };
        let ok = doc("a", LabelVector::one_hot(6, 0));
        assert!(matches!(
            Corpus::new(set.clone(), vec![ok.clone(), ok.clone()]),
            Err(Error::DuplicateDocId { .. })
        ));
        assert!(matches!(
            Corpus::new(set.clone(), vec![doc("b", LabelVector::zeros(6))]),
            Err(Error::Unlabeled { .. })
        ));
        let empty = Document::new("c", SourceKind::Structured, Vec::new());
        assert!(matches!(
            Corpus::new(set, vec![empty]),
            Err(Error::EmptyDocument { .. })
        ));
    }
}
