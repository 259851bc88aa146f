//! Cohen's kappa between two annotation rounds, per label.
//!
//! Multi-label annotations are reduced to one binary presence decision per
//! sentence and label; the report carries every per-label kappa plus their
//! unweighted mean.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Corpus, LabelSet, LabelVector};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnnotationRound {
    pub annotator_id: String,
    /// doc_id -> one label vector per sentence, in sentence order.
    pub assignments: BTreeMap<String, Vec<LabelVector>>,
}

impl AnnotationRound {
    /// Reads one annotator's labels off a corpus that holds their annotation.
    pub fn from_corpus(annotator_id: impl Into<String>, corpus: &Corpus) -> Self {
        let assignments = corpus
            .documents
            .iter()
            .map(|d| {
                (
                    d.doc_id.clone(),
                    d.sentences.iter().map(|s| s.gold.clone()).collect(),
                )
            })
            .collect();
        Self {
            annotator_id: annotator_id.into(),
            assignments,
        }
    }

    /// Checks that the round covers exactly the corpus documents and lengths.
    pub fn validate_against(&self, corpus: &Corpus) -> Result<()> {
        if self.assignments.len() != corpus.documents.len() {
            return Err(Error::Coverage(format!(
                "{} covers {} documents, corpus has {}",
                self.annotator_id,
                self.assignments.len(),
                corpus.documents.len()
            )));
        }
        for doc in &corpus.documents {
            match self.assignments.get(&doc.doc_id) {
                Some(v) if v.len() == doc.len() => {}
                Some(v) => {
                    return Err(Error::Coverage(format!(
                        "{}: `{}` has {} labels for {} sentences",
                        self.annotator_id,
                        doc.doc_id,
                        v.len(),
                        doc.len()
                    )))
                }
                None => {
                    return Err(Error::Coverage(format!(
                        "{} is missing `{}`",
                        self.annotator_id, doc.doc_id
                    )))
                }
            }
        }
        Ok(())
    }
}

/// Kappa from a 2x2 contingency table: rows are rater A (yes, no), columns
/// rater B (yes, no).
pub fn kappa_from_counts(both_yes: u64, a_only: u64, b_only: u64, both_no: u64) -> f64 {
    let n = both_yes + a_only + b_only + both_no;
    if n == 0 {
        return 1.0;
    }
    let a_yes = both_yes + a_only;
    let b_yes = both_yes + b_only;
    // p_e = 1 only when both raters are constant and equal.
    if (a_yes == n && b_yes == n) || (a_yes == 0 && b_yes == 0) {
        return if a_only == 0 && b_only == 0 { 1.0 } else { 0.0 };
    }
    let nf = n as f64;
    let p_o = (both_yes + both_no) as f64 / nf;
    let pa = a_yes as f64 / nf;
    let pb = b_yes as f64 / nf;
    let p_e = pa * pb + (1.0 - pa) * (1.0 - pb);
    (p_o - p_e) / (1.0 - p_e)
}

fn contingency(a: &AnnotationRound, b: &AnnotationRound, c: usize) -> Result<[u64; 4]> {
    if a.assignments.len() != b.assignments.len() {
        return Err(Error::Coverage(format!(
            "{} covers {} documents, {} covers {}",
            a.annotator_id,
            a.assignments.len(),
            b.annotator_id,
            b.assignments.len()
        )));
    }
    let mut t = [0u64; 4];
    for (doc_id, va) in &a.assignments {
        let vb = b.assignments.get(doc_id).ok_or_else(|| {
            Error::Coverage(format!("{} is missing `{doc_id}`", b.annotator_id))
        })?;
        if va.len() != vb.len() {
            return Err(Error::Coverage(format!(
                "`{doc_id}`: {} sentences vs {}",
                va.len(),
                vb.len()
            )));
        }
        for (x, y) in va.iter().zip(vb) {
            if c >= x.len() || c >= y.len() {
                return Err(Error::Shape(format!("label index {c} out of range")));
            }
            let idx = match (x.get(c), y.get(c)) {
                (true, true) => 0,
                (true, false) => 1,
                (false, true) => 2,
                (false, false) => 3,
            };
            t[idx] += 1;
        }
    }
    Ok(t)
}

/// Binary kappa for presence of `target_label`.
pub fn cohens_kappa(
    a: &AnnotationRound,
    b: &AnnotationRound,
    label_set: &LabelSet,
    target_label: &str,
) -> Result<f64> {
    let c = label_set
        .index_of(target_label)
        .ok_or_else(|| Error::InvalidArgument(format!("unknown label `{target_label}`")))?;
    let [yy, yn, ny, nn] = contingency(a, b, c)?;
    Ok(kappa_from_counts(yy, yn, ny, nn))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KappaReport {
    pub annotator_a: String,
    pub annotator_b: String,
    pub per_label: Vec<(String, f64)>,
    pub macro_kappa: f64,
}

pub fn kappa_report(
    a: &AnnotationRound,
    b: &AnnotationRound,
    label_set: &LabelSet,
) -> Result<KappaReport> {
    let mut per_label = Vec::with_capacity(label_set.len());
    for c in 0..label_set.len() {
        let [yy, yn, ny, nn] = contingency(a, b, c)?;
        per_label.push((label_set.name(c).to_string(), kappa_from_counts(yy, yn, ny, nn)));
    }
    let macro_kappa = per_label.iter().map(|(_, k)| k).sum::<f64>() / per_label.len() as f64;
    Ok(KappaReport {
        annotator_a: a.annotator_id.clone(),
        annotator_b: b.annotator_id.clone(),
        per_label,
        macro_kappa,
    })
}
