//! Python bindings. Structured results (reports, statistics) come back as
//! plain dicts decoded from the library's JSON form.

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;
use serde::Serialize;

use ssclab::backend::{ByteTokenizer, GoldEchoBackend, LanguageModel, ToyConfig, ToyTransformer};
use ssclab::corpus::synthetic::{generate, SyntheticConfig};
use ssclab::corpus::{self as core_corpus, LabelMode, LabelSet, LabelVector};
use ssclab::evaluation::{self, IclConfig, ThresholdGrid, TrainConfig};
use ssclab::prompting::{self, TokenCounter, WhitespaceTokenizer};
use ssclab::retrieval::{embed, DemonstrationIndex, HashedBagOfWords};
use ssclab::weighcon::{self, BankEntry, WeightingNet};

fn err(e: ssclab::Error) -> PyErr {
    match e {
        ssclab::Error::Io(e) => PyIOError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn to_py<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn mode(name: &str) -> PyResult<LabelMode> {
    match name {
        "multi" => Ok(LabelMode::Multi),
        "single" => Ok(LabelMode::Single),
        other => Err(PyValueError::new_err(format!("mode must be 'multi' or 'single', got {other:?}"))),
    }
}

fn vectors(rows: Vec<Vec<bool>>) -> Vec<LabelVector> {
    rows.into_iter().map(LabelVector::from_bits).collect()
}

/// A labeled corpus of documents.
#[pyclass(name = "Corpus", module = "ssclab")]
pub struct PyCorpus {
    inner: core_corpus::Corpus,
}

#[pymethods]
impl PyCorpus {
    /// Reads a corpus JSONL file.
    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        Ok(Self {
            inner: core_corpus::load_corpus(path).map_err(err)?,
        })
    }

    /// Parses corpus JSONL text.
    #[staticmethod]
    fn from_jsonl(text: &str) -> PyResult<Self> {
        Ok(Self {
            inner: core_corpus::parse_corpus(text).map_err(err)?,
        })
    }

    /// Deterministic synthetic abstracts.
    #[staticmethod]
    #[pyo3(signature = (n_docs = 200, seed = 42))]
    fn synthetic(n_docs: usize, seed: u64) -> Self {
        Self {
            inner: generate(&SyntheticConfig {
                n_docs,
                seed,
                ..SyntheticConfig::default()
            }),
        }
    }

    fn save(&self, path: &str) -> PyResult<()> {
        core_corpus::write_corpus(&self.inner, path).map_err(err)
    }

    fn to_jsonl(&self) -> String {
        core_corpus::to_jsonl(&self.inner)
    }

    #[getter]
    fn labels(&self) -> Vec<String> {
        self.inner.label_set.names().to_vec()
    }

    #[getter]
    fn doc_ids(&self) -> Vec<String> {
        self.inner.documents.iter().map(|d| d.doc_id.clone()).collect()
    }

    #[getter]
    fn n_sentences(&self) -> usize {
        self.inner.n_sentences()
    }

    fn __len__(&self) -> usize {
        self.inner.documents.len()
    }

    /// `(text, [labels])` pairs of one document.
    fn sentences(&self, doc_id: &str) -> PyResult<Vec<(String, Vec<String>)>> {
        let doc = self.doc(doc_id)?;
        let labels = &self.inner.label_set;
        Ok(doc
            .sentences
            .iter()
            .map(|s| (s.text.clone(), s.gold.names(labels).iter().map(|n| n.to_string()).collect()))
            .collect())
    }

    fn stats<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &core_corpus::corpus_stats(&self.inner))
    }

    /// Stratified (train, dev, test) split by source kind.
    #[pyo3(signature = (ratios = (0.6, 0.2, 0.2), seed = 42))]
    fn split(&self, ratios: (f64, f64, f64), seed: u64) -> PyResult<(Self, Self, Self)> {
        let (a, b, c) = core_corpus::stratified_split(&self.inner, ratios, seed).map_err(err)?;
        Ok((Self { inner: a }, Self { inner: b }, Self { inner: c }))
    }

    fn __repr__(&self) -> String {
        format!(
            "Corpus({} documents, {} sentences)",
            self.inner.documents.len(),
            self.inner.n_sentences()
        )
    }
}

impl PyCorpus {
    fn doc(&self, doc_id: &str) -> PyResult<&core_corpus::Document> {
        self.inner
            .document(doc_id)
            .ok_or_else(|| PyValueError::new_err(format!("no document `{doc_id}`")))
    }
}

#[pyfunction]
fn render_demonstration(corpus: &PyCorpus, doc_id: &str) -> PyResult<String> {
    prompting::render_demonstration(corpus.doc(doc_id)?, &corpus.inner.label_set).map_err(err)
}

/// Query for the sentence at 1-based `index`.
#[pyfunction]
fn render_query(corpus: &PyCorpus, doc_id: &str, index: usize) -> PyResult<String> {
    prompting::render_query(corpus.doc(doc_id)?, index, &corpus.inner.label_set).map_err(err)
}

/// k-shot prompt for one sentence, with demonstrations retrieved from `pool`.
#[pyfunction]
#[pyo3(signature = (corpus, doc_id, index, pool, shots = 1, budget = 1200, tokenizer = "byte"))]
fn build_prompt<'py>(
    py: Python<'py>,
    corpus: &PyCorpus,
    doc_id: &str,
    index: usize,
    pool: &PyCorpus,
    shots: usize,
    budget: usize,
    tokenizer: &str,
) -> PyResult<Bound<'py, PyAny>> {
    let doc = corpus.doc(doc_id)?;
    let target = doc
        .sentences
        .get(index.wrapping_sub(1))
        .ok_or_else(|| PyValueError::new_err(format!("sentence index {index} out of range")))?;
    let emb = HashedBagOfWords::default();
    let index_ = DemonstrationIndex::build(&emb, &pool.inner).map_err(err)?;
    let ranking = index_.rank(&embed(&emb, &target.text).map_err(err)?, shots, Some(doc_id));
    let demos: Vec<_> = ranking.documents.iter().map(|r| &pool.inner.documents[r.pool_index]).collect();
    let tok: &dyn TokenCounter = match tokenizer {
        "byte" => &ByteTokenizer,
        "whitespace" => &WhitespaceTokenizer,
        other => return Err(PyValueError::new_err(format!("unknown tokenizer {other:?}"))),
    };
    let prompt = prompting::assemble_prompt(&demos, doc, index, &corpus.inner.label_set, budget, tok).map_err(err)?;
    to_py(py, &prompt)
}

/// Label names read from generated text, or None when nothing matches.
#[pyfunction]
#[pyo3(signature = (generated, labels = None, mode = "multi"))]
fn parse_label(generated: &str, labels: Option<Vec<String>>, mode: &str) -> PyResult<Option<Vec<String>>> {
    let set = match labels {
        Some(names) => LabelSet::new(names).map_err(err)?,
        None => LabelSet::rhetorical(),
    };
    Ok(prompting::parse_generated_label(generated, &set, self::mode(mode)?)
        .ok()
        .map(|v| v.names(&set).iter().map(|n| n.to_string()).collect()))
}

/// Contrastive loss and its gradients. `w` has length `2 m`; omitted means a
/// zero-initialized weighting net.
#[pyfunction]
#[pyo3(signature = (h, y, bank_h = None, bank_y = None, w = None, b = 0.0))]
fn weighcon_loss<'py>(
    py: Python<'py>,
    h: Vec<Vec<f64>>,
    y: Vec<Vec<bool>>,
    bank_h: Option<Vec<Vec<f64>>>,
    bank_y: Option<Vec<Vec<bool>>>,
    w: Option<Vec<f64>>,
    b: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let m = y.first().map_or(0, Vec::len);
    let (bank_h, bank_y) = (bank_h.unwrap_or_default(), bank_y.unwrap_or_default());
    if bank_h.len() != bank_y.len() {
        return Err(PyValueError::new_err("bank_h and bank_y differ in length"));
    }
    let bank: Vec<BankEntry> = bank_h
        .into_iter()
        .zip(bank_y)
        .enumerate()
        .map(|(step, (h, y))| BankEntry {
            h,
            y: LabelVector::from_bits(y),
            step: step as u64,
        })
        .collect();
    let net = WeightingNet {
        w: w.unwrap_or_else(|| vec![0.0; 2 * m]),
        b,
    };
    let out = weighcon::weighcon_loss(&h, &vectors(y), &bank, &net).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("l_con", out.l_con)?;
    d.set_item("n_positive_pairs", out.n_positive_pairs)?;
    d.set_item("n_skipped_terms", out.n_skipped_terms)?;
    d.set_item("d_h", out.d_h)?;
    d.set_item("d_net", out.d_net)?;
    Ok(d)
}

/// `l_ce + lam * l_con`.
#[pyfunction]
fn combined_loss(l_ce: f64, l_con: f64, lam: f64) -> PyResult<f64> {
    Ok(weighcon::combined_loss(l_ce, l_con, lam).map_err(err)?.l_total)
}

#[pyfunction]
fn f1_scores<'py>(py: Python<'py>, pred: Vec<Vec<bool>>, gold: Vec<Vec<bool>>, labels: Vec<String>) -> PyResult<Bound<'py, PyAny>> {
    let set = LabelSet::new(labels).map_err(err)?;
    to_py(py, &evaluation::f1_scores(&vectors(pred), &vectors(gold), &set).map_err(err)?)
}

/// Per-label thresholds on the default 0.05..0.95 grid.
#[pyfunction]
fn tune_thresholds(probs: Vec<Vec<f64>>, gold: Vec<Vec<bool>>) -> PyResult<Vec<f64>> {
    let profile = evaluation::tune_thresholds(&probs, &vectors(gold), ThresholdGrid::default(), "python").map_err(err)?;
    Ok(profile.thresholds)
}

/// Kappa from a 2x2 table.
#[pyfunction]
fn kappa_from_counts(both_yes: u64, a_only: u64, b_only: u64, both_no: u64) -> f64 {
    core_corpus::kappa_from_counts(both_yes, a_only, b_only, both_no)
}

/// In-context evaluation against the gold-echo backend (pipeline check).
#[pyfunction]
#[pyo3(signature = (test, train, shots = 1))]
fn icl_gold_echo<'py>(py: Python<'py>, test: &PyCorpus, train: &PyCorpus, shots: usize) -> PyResult<Bound<'py, PyAny>> {
    let backend = GoldEchoBackend::from_corpus(&test.inner).map_err(err)?;
    let config = IclConfig {
        shots,
        ..IclConfig::default()
    };
    let emb = HashedBagOfWords::default();
    let report = evaluation::run_icl(&test.inner, &train.inner, &backend as &dyn LanguageModel, &emb, &config, &mut |_| Ok(()))
        .map_err(err)?;
    to_py(py, &report)
}

/// Trains on the toy backend and returns dev (and optionally test) reports.
#[pyfunction]
#[pyo3(signature = (train, dev, test = None, epochs = 5, lr = 2e-3, lam = 0.1, batch_size = 8, max_steps = None, seed = 42))]
#[allow(clippy::too_many_arguments)]
fn train<'py>(
    py: Python<'py>,
    train: &PyCorpus,
    dev: &PyCorpus,
    test: Option<&PyCorpus>,
    epochs: usize,
    lr: f64,
    lam: f64,
    batch_size: usize,
    max_steps: Option<usize>,
    seed: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let config = TrainConfig {
        epochs,
        lr,
        lambda: lam,
        batch_size,
        max_steps,
        seed,
        ..TrainConfig::default()
    };
    let (tr, dv, te) = (&train.inner, &dev.inner, test.map(|t| &t.inner));
    let (dev_report, test_report) = py
        .detach(|| -> ssclab::Result<_> {
            let mut model = ToyTransformer::new(ToyConfig::default())?;
            model.attach_adapters(7);
            let emb = HashedBagOfWords::default();
            let out = evaluation::run_training(&mut model, tr, dv, &emb, &config, &mut |_| Ok(()))?;
            let test_report = te
                .map(|te| evaluation::evaluate_trained(&model, &out.head, &out.profile, tr, te, &emb, &config))
                .transpose()?;
            Ok((out.dev_report, test_report))
        })
        .map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("dev", to_py(py, &dev_report)?)?;
    d.set_item("test", test_report.map(|r| to_py(py, &r)).transpose()?)?;
    Ok(d)
}

#[pymodule]
#[pyo3(name = "ssclab")]
fn ssclab_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PyCorpus>()?;
    m.add_function(wrap_pyfunction!(render_demonstration, m)?)?;
    m.add_function(wrap_pyfunction!(render_query, m)?)?;
    m.add_function(wrap_pyfunction!(build_prompt, m)?)?;
    m.add_function(wrap_pyfunction!(parse_label, m)?)?;
    m.add_function(wrap_pyfunction!(weighcon_loss, m)?)?;
    m.add_function(wrap_pyfunction!(combined_loss, m)?)?;
    m.add_function(wrap_pyfunction!(f1_scores, m)?)?;
    m.add_function(wrap_pyfunction!(tune_thresholds, m)?)?;
    m.add_function(wrap_pyfunction!(kappa_from_counts, m)?)?;
    m.add_function(wrap_pyfunction!(icl_gold_echo, m)?)?;
    m.add_function(wrap_pyfunction!(train, m)?)?;
    Ok(())
}
