//! JSONL corpus format.
//!
//! ```text
//! {"label_set":["BACKGROUND","OBJECTIVE",...]}
//! {"doc_id":"d1","source_kind":"unstructured","sentences":[{"text":"...","labels":["METHODS"]}]}
//! ```
//!
//! The first line is the label-set header; every following non-blank line is
//! one document. Writing always produces the canonical form: whitespace
//! normalized, labels in label-set order, LF line endings.

use std::collections::HashSet;
use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{normalize_whitespace, Corpus, Document, LabelSet, SourceKind};
use crate::error::{Error, Result};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    label_set: Vec<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DocRecord {
    doc_id: String,
    source_kind: SourceKind,
    sentences: Vec<SentenceRecord>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SentenceRecord {
    text: String,
    labels: Vec<String>,
}

pub fn load_corpus(path: impl AsRef<Path>) -> Result<Corpus> {
    let text = fs::read_to_string(path)?;
    parse_corpus(&text)
}

pub fn parse_corpus(text: &str) -> Result<Corpus> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| !l.trim().is_empty());

    let (line, header) = lines.next().ok_or(Error::Malformed {
        line: 1,
        message: "missing label_set header".into(),
    })?;
    let header: Header = serde_json::from_str(header).map_err(|e| Error::Malformed {
        line,
        message: format!("bad header: {e}"),
    })?;
    let label_set = LabelSet::new(header.label_set).map_err(|e| Error::Malformed {
        line,
        message: e.to_string(),
    })?;

    let mut documents = Vec::new();
    let mut ids = HashSet::new();
    for (line, raw) in lines {
        let record: DocRecord = serde_json::from_str(raw).map_err(|e| Error::Malformed {
            line,
            message: e.to_string(),
        })?;
        if !ids.insert(record.doc_id.clone()) {
            return Err(Error::DuplicateDocId {
                line,
                doc_id: record.doc_id,
            });
        }
        if record.sentences.is_empty() {
            return Err(Error::EmptyDocument {
                line,
                doc_id: record.doc_id,
            });
        }
        let mut sentences = Vec::with_capacity(record.sentences.len());
        for (j, s) in record.sentences.into_iter().enumerate() {
            let text = normalize_whitespace(&s.text);
            if text.is_empty() {
                return Err(Error::Malformed {
                    line,
                    message: format!("sentence {} of `{}` is empty", j + 1, record.doc_id),
                });
            }
            if s.labels.is_empty() {
                return Err(Error::Malformed {
                    line,
                    message: format!("sentence {} of `{}` has no labels", j + 1, record.doc_id),
                });
            }
            let gold = label_set
                .vector_from_names(&s.labels)
                .map_err(|label| Error::UnknownLabel { line, label })?;
            sentences.push((text, gold));
        }
        documents.push(Document::new(record.doc_id, record.source_kind, sentences));
    }
    Corpus::new(label_set, documents)
}

/// Serializes a corpus into canonical JSONL.
pub fn to_jsonl(corpus: &Corpus) -> String {
    let mut out = String::new();
    let header = Header {
        label_set: corpus.label_set.names().to_vec(),
    };
    out.push_str(&serde_json::to_string(&header).expect("header serializes"));
    out.push('\n');
    for doc in &corpus.documents {
        let record = DocRecord {
            doc_id: doc.doc_id.clone(),
            source_kind: doc.source_kind,
            sentences: doc
                .sentences
                .iter()
                .map(|s| SentenceRecord {
                    text: s.text.clone(),
                    labels: s
                        .gold
                        .names(&corpus.label_set)
                        .into_iter()
                        .map(String::from)
                        .collect(),
                })
                .collect(),
        };
        out.push_str(&serde_json::to_string(&record).expect("document serializes"));
        out.push('\n');
    }
    out
}

pub fn write_corpus(corpus: &Corpus, path: impl AsRef<Path>) -> Result<()> {
    let mut file = fs::File::create(path)?;
    file.write_all(to_jsonl(corpus).as_bytes())?;
    Ok(())
}
