use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },

    #[error("line {line}: unknown label `{label}`")]
    UnknownLabel { line: usize, label: String },

    #[error("line {line}: document `{doc_id}` has no sentences")]
    EmptyDocument { line: usize, doc_id: String },

    #[error("line {line}: duplicate doc_id `{doc_id}`")]
    DuplicateDocId { line: usize, doc_id: String },

    #[error("document `{doc_id}` sentence {index} has no labels")]
    Unlabeled { doc_id: String, index: usize },

    #[error("invalid label set: {0}")]
    InvalidLabelSet(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("annotation coverage mismatch: {0}")]
    Coverage(String),

    #[error("stratum `{stratum}` has {size} documents, fewer than the {splits} requested splits")]
    StratumTooSmall {
        stratum: String,
        size: usize,
        splits: usize,
    },

    #[error("zero-norm vector")]
    ZeroVector,

    #[error("query alone needs {needed} tokens but the budget is {budget}")]
    QueryExceedsBudget { needed: usize, budget: usize },

    #[error("context overflow: {len} tokens exceeds the backend limit of {limit}")]
    ContextOverflow { len: usize, limit: usize },

    #[error("backend unavailable: {0}")]
    Backend(String),

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("training diverged at step {step}: {detail}")]
    Diverged { step: usize, detail: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
