use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::corpus::{LabelSet, LabelVector};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl Confusion {
    /// `2TP / (2TP + FP + FN)`, or 0 when nothing was predicted or present.
    pub fn f1(&self) -> f64 {
        let denom = 2 * self.tp + self.fp + self.fn_;
        if denom == 0 {
            0.0
        } else {
            2.0 * self.tp as f64 / denom as f64
        }
    }

    pub fn precision(&self) -> f64 {
        ratio(self.tp, self.tp + self.fp)
    }

    pub fn recall(&self) -> f64 {
        ratio(self.tp, self.tp + self.fn_)
    }
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabelScore {
    pub label: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub counts: Confusion,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub micro_f1: f64,
    pub macro_f1: f64,
    pub per_label: Vec<LabelScore>,
    pub n_sentences: usize,
    pub n_parse_failures: usize,
    /// Settings that produced the predictions (shots, tokens, lambda, flags).
    #[serde(default)]
    pub config: serde_json::Value,
}

impl EvalReport {
    pub fn with_config(mut self, config: serde_json::Value) -> Self {
        self.config = config;
        self
    }

    /// Micro F1 from the stored per-label counts.
    pub fn recompute_micro(&self) -> f64 {
        let pooled = self.per_label.iter().fold(Confusion::default(), |acc, s| Confusion {
            tp: acc.tp + s.counts.tp,
            fp: acc.fp + s.counts.fp,
            fn_: acc.fn_ + s.counts.fn_,
        });
        pooled.f1()
    }

    /// Macro F1 from the stored per-label counts.
    pub fn recompute_macro(&self) -> f64 {
        if self.per_label.is_empty() {
            return 0.0;
        }
        self.per_label.iter().map(|s| s.counts.f1()).sum::<f64>() / self.per_label.len() as f64
    }
}

/// Per-label, micro and macro F1 of `pred` against `gold`.
pub fn f1_scores(pred: &[LabelVector], gold: &[LabelVector], labels: &LabelSet) -> Result<EvalReport> {
    if pred.len() != gold.len() {
        return Err(Error::Shape(format!("{} predictions for {} gold vectors", pred.len(), gold.len())));
    }
    let m = labels.len();
    if let Some(bad) = pred.iter().chain(gold).find(|v| v.len() != m) {
        return Err(Error::Shape(format!("label vector of length {} for m = {m}", bad.len())));
    }
    let mut counts = vec![Confusion::default(); m];
    for (p, g) in pred.iter().zip(gold) {
        for (c, counts) in counts.iter_mut().enumerate() {
            match (p.get(c), g.get(c)) {
                (true, true) => counts.tp += 1,
                (true, false) => counts.fp += 1,
                (false, true) => counts.fn_ += 1,
                (false, false) => {}
            }
        }
    }
    let per_label: Vec<LabelScore> = counts
        .iter()
        .enumerate()
        .map(|(c, k)| LabelScore {
            label: labels.name(c).to_string(),
            precision: k.precision(),
            recall: k.recall(),
            f1: k.f1(),
            counts: *k,
        })
        .collect();
    let mut report = EvalReport {
        micro_f1: 0.0,
        macro_f1: 0.0,
        per_label,
        n_sentences: gold.len(),
        n_parse_failures: 0,
        config: serde_json::Value::Null,
    };
    report.micro_f1 = report.recompute_micro();
    report.macro_f1 = report.recompute_macro();
    Ok(report)
}

/// Markdown table with one row per named report and Micro/Macro F1 columns
/// per label, as percentages.
pub fn rows_table(rows: &[(String, &EvalReport)]) -> String {
    let mut out = String::new();
    let Some((_, first)) = rows.first() else {
        return out;
    };
    let labels: Vec<&str> = first.per_label.iter().map(|s| s.label.as_str()).collect();
    let _ = write!(out, "| Setting | Micro F1 | Macro F1 |");
    for l in &labels {
        let _ = write!(out, " {l} |");
    }
    let _ = write!(out, " Parse failures |\n|---|---:|---:|");
    for _ in &labels {
        out.push_str("---:|");
    }
    out.push_str("---:|\n");
    for (name, r) in rows {
        let _ = write!(out, "| {name} | {:.2} | {:.2} |", 100.0 * r.micro_f1, 100.0 * r.macro_f1);
        for s in &r.per_label {
            let _ = write!(out, " {:.2} |", 100.0 * s.f1);
        }
        let _ = writeln!(out, " {} |", r.n_parse_failures);
    }
    out
}

/// Markdown table with one column per named report (shot sweeps).
pub fn columns_table(columns: &[(String, &EvalReport)]) -> String {
    let mut out = String::from("| Metric |");
    for (name, _) in columns {
        let _ = write!(out, " {name} |");
    }
    out.push_str("\n|---|");
    for _ in columns {
        out.push_str("---:|");
    }
    out.push('\n');
    let mut row = |name: &str, f: &dyn Fn(&EvalReport) -> String| {
        let _ = write!(out, "| {name} |");
        for (_, r) in columns {
            let _ = write!(out, " {} |", f(r));
        }
        out.push('\n');
    };
    row("Micro F1", &|r| format!("{:.2}", 100.0 * r.micro_f1));
    row("Macro F1", &|r| format!("{:.2}", 100.0 * r.macro_f1));
    row("Parse failures", &|r| r.n_parse_failures.to_string());
    out
}
