//! Threshold tuning, decoding, F1 metrics, and the in-context and
//! fine-tuning experiment harnesses.

mod icl;
mod metrics;
mod optim;
mod thresholds;
mod train;

pub use icl::{prompt_hash, run_icl, IclConfig, TraceRecord};
pub use metrics::{columns_table, f1_scores, rows_table, Confusion, EvalReport, LabelScore};
pub use optim::AdamW;
pub use thresholds::{
    decode_predictions, tune_thresholds, ThresholdGrid, ThresholdProfile, ABSENT_LABEL_THRESHOLD,
};
pub use train::{
    build_prompts, evaluate_trained, predict_probs, run_training, score, Ablation, EpochSummary,
    PromptSettings, SelectionMetric, TrainConfig, TrainOutcome,
};
