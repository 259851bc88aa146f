//! Prompt templates for demonstrations and queries, budgeted k-shot assembly,
//! and parsing of generated label text.
//!
//! A demonstration renders a fully labeled paragraph:
//!
//! ```text
//! <Start> The paragraph is {context}. Select from rhetorical labels including {labels}, the sentence {s1} plays a rhetorical role as <{y1}>, ..., the sentence {sn} plays a rhetorical role as <{yn}> <End>
//! ```
//!
//! A query leaves the target's label open and ends right after
//! `plays a rhetorical role as ` (with one trailing space). Multi-label
//! sentences list their labels comma-separated inside one bracket pair.

mod parse;
mod tokenizer;

use serde::{Deserialize, Serialize};

use crate::corpus::{Document, LabelSet, SentenceRef};
use crate::error::{Error, Result};

pub use parse::{parse_generated_label, ParseFailure};
pub use tokenizer::{TokenCounter, WhitespaceTokenizer};

const ROLE_PHRASE: &str = "plays a rhetorical role as";

/// Separator between consecutive demonstrations and before the query.
pub const SEPARATOR: &str = "\n";

fn preamble(context: &str, labels: &LabelSet) -> String {
    format!(
        "<Start> The paragraph is {context}. Select from rhetorical labels including {}, ",
        labels.joined()
    )
}

pub fn render_demonstration(doc: &Document, labels: &LabelSet) -> Result<String> {
    let mut clauses = Vec::with_capacity(doc.len());
    for s in &doc.sentences {
        if !s.gold.any() {
            return Err(Error::Unlabeled {
                doc_id: doc.doc_id.clone(),
                index: s.index,
            });
        }
        clauses.push(format!(
            "the sentence {} {ROLE_PHRASE} <{}>",
            s.text,
            s.gold.names(labels).join(", ")
        ));
    }
    Ok(format!(
        "{}{} <End>",
        preamble(&doc.context(), labels),
        clauses.join(", ")
    ))
}

/// Renders the query for the sentence at 1-based `target_index`.
pub fn render_query(doc: &Document, target_index: usize, labels: &LabelSet) -> Result<String> {
    let target = target_index
        .checked_sub(1)
        .and_then(|i| doc.sentences.get(i))
        .ok_or_else(|| {
            Error::InvalidArgument(format!(
                "sentence index {target_index} out of range for `{}` ({} sentences)",
                doc.doc_id,
                doc.len()
            ))
        })?;
    Ok(format!(
        "{}the sentence {} {ROLE_PHRASE} ",
        preamble(&doc.context(), labels),
        target.text
    ))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Prompt {
    pub target_ref: SentenceRef,
    pub n_shots: usize,
    /// True when at least one offered demonstration was dropped for budget.
    pub truncated: bool,
    pub text: String,
}

impl Prompt {
    /// The query part: everything after the last separator.
    pub fn query(&self) -> &str {
        self.text.rsplit(SEPARATOR).next().unwrap_or(&self.text)
    }
}

/// Joins ranked demonstrations and the query, adding demonstrations in order
/// while the whole prompt stays within `token_budget`.
pub fn assemble_prompt(
    demos: &[&Document],
    query_doc: &Document,
    target_index: usize,
    labels: &LabelSet,
    token_budget: usize,
    tokenizer: &dyn TokenCounter,
) -> Result<Prompt> {
    let query = render_query(query_doc, target_index, labels)?;
    let needed = tokenizer.count(&query);
    if needed > token_budget {
        return Err(Error::QueryExceedsBudget {
            needed,
            budget: token_budget,
        });
    }
    let mut text = query.clone();
    let mut parts: Vec<String> = Vec::with_capacity(demos.len());
    for demo in demos {
        let rendered = render_demonstration(demo, labels)?;
        let mut candidate = parts.join(SEPARATOR);
        if !candidate.is_empty() {
            candidate.push_str(SEPARATOR);
        }
        candidate.push_str(&rendered);
        candidate.push_str(SEPARATOR);
        candidate.push_str(&query);
        if tokenizer.count(&candidate) > token_budget {
            break;
        }
        parts.push(rendered);
        text = candidate;
    }
    Ok(Prompt {
        target_ref: SentenceRef {
            doc_id: query_doc.doc_id.clone(),
            index: target_index,
        },
        n_shots: parts.len(),
        truncated: parts.len() < demos.len(),
        text,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{LabelVector, SourceKind};

    fn doc(sentences: &[(&str, &[usize])]) -> Document {
        Document::new(
            "d1",
            SourceKind::Unstructured,
            sentences
                .iter()
                .map(|(t, l)| (t.to_string(), LabelVector::from_indices(6, l))),
        )
    }

    #[test]
    fn demonstration_template() {
        let labels = LabelSet::rhetorical();
        let d = doc(&[("We did X.", &[2])]);
        let text = render_demonstration(&d, &labels).unwrap();
        assert_eq!(
            text,
            "<Start> The paragraph is We did X.. Select from rhetorical labels including \
             BACKGROUND, OBJECTIVE, METHODS, RESULTS, CONCLUSIONS, OTHER, the sentence We did X. \
             plays a rhetorical role as <METHODS> <End>"
        );
    }

    #[test]
    fn multi_label_sentences_join_inside_one_bracket() {
        let labels = LabelSet::rhetorical();
        let d = doc(&[("a", &[1, 2]), ("b", &[3]), ("c", &[4])]);
        let text = render_demonstration(&d, &labels).unwrap();
        assert!(text.contains("<OBJECTIVE, METHODS>"));
        assert_eq!(text.matches("plays a rhetorical role as").count(), 3);
    }

    #[test]
    fn query_selects_by_position() {
        let labels = LabelSet::rhetorical();
        let d = doc(&[("same", &[0]), ("other", &[1]), ("same", &[2])]);
        let q = render_query(&d, 3, &labels).unwrap();
        assert!(q.ends_with("the sentence same plays a rhetorical role as "));
        assert!(!q.contains("<End>"));
        assert!(render_query(&d, 0, &labels).is_err());
        assert!(render_query(&d, 4, &labels).is_err());
        let single = doc(&[("only one.", &[0])]);
        let q = render_query(&single, 1, &labels).unwrap();
        assert!(q.starts_with("<Start> The paragraph is only one.. Select"));
    }

    #[test]
    fn unlabeled_demo_is_rejected() {
        let labels = LabelSet::rhetorical();
        let d = Document::new(
            "d",
            SourceKind::Structured,
            vec![("x".to_string(), LabelVector::zeros(6))],
        );
        assert!(matches!(
            render_demonstration(&d, &labels),
            Err(Error::Unlabeled { .. })
        ));
    }

    #[test]
    fn budget_boundary_is_inclusive() {
        let labels = LabelSet::rhetorical();
        let demo = doc(&[("demo sentence", &[2])]);
        let query_doc = doc(&[("target sentence", &[3])]);
        let ws = WhitespaceTokenizer;
        let q = ws.count(&render_query(&query_doc, 1, &labels).unwrap());
        let d = ws.count(&render_demonstration(&demo, &labels).unwrap());
        let exact = assemble_prompt(&[&demo], &query_doc, 1, &labels, q + d, &ws).unwrap();
        assert_eq!(exact.n_shots, 1);
        assert!(!exact.truncated);
        let short = assemble_prompt(&[&demo], &query_doc, 1, &labels, q + d - 1, &ws).unwrap();
        assert_eq!(short.n_shots, 0);
        assert!(short.truncated);
        assert!(matches!(
            assemble_prompt(&[], &query_doc, 1, &labels, q - 1, &ws),
            Err(Error::QueryExceedsBudget { .. })
        ));
    }

    #[test]
    fn assembled_prompt_structure() {
        let labels = LabelSet::rhetorical();
        let a = doc(&[("first demo", &[0]), ("more", &[4])]);
        let b = doc(&[("second demo", &[3])]);
        let query_doc = doc(&[("target", &[2])]);
        let p = assemble_prompt(&[&a, &b], &query_doc, 1, &labels, 8192, &WhitespaceTokenizer)
            .unwrap();
        assert_eq!(p.n_shots, 2);
        assert_eq!(p.text.matches("<End>").count(), 2);
        assert_eq!(p.text.matches("<Start>").count(), 3);
        assert_eq!(p.query(), render_query(&query_doc, 1, &labels).unwrap());
        assert!(p.text.starts_with(&render_demonstration(&a, &labels).unwrap()));
    }
}
