use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::metrics::{f1_scores, EvalReport};
use super::optim::AdamW;
use super::thresholds::{decode_predictions, tune_thresholds, ThresholdGrid, ThresholdProfile};
use crate::backend::{LanguageModel, TrainableModel};
use crate::corpus::{Corpus, LabelMode, LabelVector};
use crate::error::{Error, Result};
use crate::prompting::assemble_prompt;
use crate::retrieval::{embed, DemonstrationIndex, EmbeddingBackend};
use crate::verbalizer::{classification_loss, concat_hidden, probabilities, HeadShape, VerbalizerHead};
use crate::weighcon::{combined_loss, weighcon_loss, MemoryBank, StepTelemetry, WeightingNet};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SelectionMetric {
    #[default]
    Micro,
    Macro,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct Ablation {
    /// Forces lambda = 0.
    pub no_weighcon: bool,
    /// Query-only prompts.
    pub no_demonstration: bool,
    /// One generated token instead of `n_tokens`.
    pub no_space_thinking: bool,
}

impl Ablation {
    /// Parses an arm name: `full`, `no-weighcon`, `no-demonstration` or
    /// `no-space-thinking`.
    pub fn from_arm(arm: &str) -> Result<Self> {
        let mut a = Self::default();
        match arm {
            "full" => {}
            "no-weighcon" => a.no_weighcon = true,
            "no-demonstration" => a.no_demonstration = true,
            "no-space-thinking" => a.no_space_thinking = true,
            other => return Err(Error::InvalidArgument(format!("unknown ablation arm `{other}`"))),
        }
        Ok(a)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub k_demo: usize,
    pub n_tokens: usize,
    pub lambda: f64,
    pub bank_capacity: usize,
    pub epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub weight_decay: f64,
    pub d_h: usize,
    pub token_budget: usize,
    pub seed: u64,
    pub grid: ThresholdGrid,
    /// Use this threshold for every label instead of tuning on dev.
    pub fixed_threshold: Option<f64>,
    pub selection: SelectionMetric,
    pub mode: LabelMode,
    pub ablation: Ablation,
    /// Stop after this many optimizer steps (dev selection still runs).
    pub max_steps: Option<usize>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            k_demo: 1,
            n_tokens: 2,
            lambda: 0.1,
            bank_capacity: 512,
            epochs: 5,
            batch_size: 8,
            lr: 2e-4,
            weight_decay: 0.0,
            d_h: 256,
            token_budget: 1200,
            seed: 42,
            grid: ThresholdGrid::default(),
            fixed_threshold: None,
            selection: SelectionMetric::Micro,
            mode: LabelMode::Multi,
            ablation: Ablation::default(),
            max_steps: None,
        }
    }
}

impl TrainConfig {
    pub fn effective_lambda(&self) -> f64 {
        if self.ablation.no_weighcon {
            0.0
        } else {
            self.lambda
        }
    }

    pub fn effective_n_tokens(&self) -> usize {
        if self.ablation.no_space_thinking {
            1
        } else {
            self.n_tokens
        }
    }

    pub fn effective_k_demo(&self) -> usize {
        if self.ablation.no_demonstration {
            0
        } else {
            self.k_demo
        }
    }

    pub fn prompt_settings(&self) -> PromptSettings {
        PromptSettings {
            k_demo: self.effective_k_demo(),
            n_tokens: self.effective_n_tokens(),
            token_budget: self.token_budget,
            mode: self.mode,
        }
    }

    pub fn echo(&self) -> serde_json::Value {
        serde_json::json!({
            "k_demo": self.effective_k_demo(),
            "n_tokens": self.effective_n_tokens(),
            "lambda": self.effective_lambda(),
            "bank_capacity": self.bank_capacity,
            "ablation": self.ablation,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptSettings {
    pub k_demo: usize,
    pub n_tokens: usize,
    pub token_budget: usize,
    pub mode: LabelMode,
}

/// Prompt text and gold labels for every sentence of `docs`, with
/// demonstrations retrieved from `index` (never from the sentence's own
/// document).
pub fn build_prompts(
    docs: &Corpus,
    index: &DemonstrationIndex<'_>,
    embedder: &dyn EmbeddingBackend,
    model: &dyn LanguageModel,
    settings: &PromptSettings,
) -> Result<Vec<(String, LabelVector)>> {
    let pool = index.pool();
    docs.sentences()
        .map(|(doc, s)| {
            let demos: Vec<_> = if settings.k_demo == 0 {
                Vec::new()
            } else {
                let target = embed(embedder, &s.text)?;
                index
                    .rank(&target, settings.k_demo, Some(&doc.doc_id))
                    .documents
                    .iter()
                    .map(|r| &pool.documents[r.pool_index])
                    .collect()
            };
            let prompt = assemble_prompt(&demos, doc, s.index, &docs.label_set, settings.token_budget, model.tokenizer())?;
            Ok((prompt.text, s.gold.clone()))
        })
        .collect()
}

/// Label probabilities for each prompt, in the decoding convention of `mode`.
pub fn predict_probs(
    model: &dyn LanguageModel,
    head: &VerbalizerHead,
    prompts: &[(String, LabelVector)],
    settings: &PromptSettings,
) -> Result<Vec<Vec<f64>>> {
    prompts
        .iter()
        .map(|(text, _)| {
            let g = model.generate(text, settings.n_tokens)?;
            let out = head.forward(&concat_hidden(&g.hidden_states)?)?;
            Ok(probabilities(&out.z, settings.mode))
        })
        .collect()
}

/// Decodes and scores `probs` against the gold labels of `prompts`.
pub fn score(probs: &[Vec<f64>], prompts: &[(String, LabelVector)], profile: &ThresholdProfile, docs: &Corpus, mode: LabelMode) -> Result<EvalReport> {
    let pred = decode_predictions(probs, profile, mode)?;
    let gold: Vec<LabelVector> = prompts.iter().map(|(_, g)| g.clone()).collect();
    f1_scores(&pred, &gold, &docs.label_set)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochSummary {
    pub epoch: usize,
    pub steps: usize,
    pub mean_l_ce: f64,
    pub mean_l_con: f64,
    pub mean_l_total: f64,
    pub dev_micro_f1: f64,
    pub dev_macro_f1: f64,
}

pub struct TrainOutcome {
    pub head: VerbalizerHead,
    pub net: WeightingNet,
    pub adapters: Vec<f32>,
    pub profile: ThresholdProfile,
    pub dev_report: EvalReport,
    pub best_epoch: usize,
    pub epochs: Vec<EpochSummary>,
    pub steps: usize,
    /// Steps whose contrastive term was dropped for a zero representation.
    pub zero_representation_steps: usize,
}

struct Best {
    metric: f64,
    head: VerbalizerHead,
    net: WeightingNet,
    adapters: Vec<f32>,
    profile: ThresholdProfile,
    report: EvalReport,
    epoch: usize,
}

/// Trains adapters, verbalizer head and weighting net on `train`, selecting
/// the dev-best epoch. On return the model carries the selected adapters.
///
/// Each step: greedy generation with traces, head forward, mean
/// classification loss plus `lambda * l_con` over the batch and the memory
/// bank, backward into all three parameter groups, AdamW update, then the
/// batch representations are pushed into the bank.
pub fn run_training<M: TrainableModel>(
    model: &mut M,
    train: &Corpus,
    dev: &Corpus,
    embedder: &dyn EmbeddingBackend,
    config: &TrainConfig,
    on_step: &mut dyn FnMut(&StepTelemetry) -> Result<()>,
) -> Result<TrainOutcome> {
    if train.is_empty() || dev.is_empty() {
        return Err(Error::InvalidArgument("training needs non-empty train and dev splits".into()));
    }
    if config.batch_size == 0 || config.epochs == 0 {
        return Err(Error::InvalidArgument("batch_size and epochs must be positive".into()));
    }
    let lambda = config.effective_lambda();
    combined_loss(0.0, 0.0, lambda)?;
    let settings = config.prompt_settings();
    let m = train.n_labels();
    let index = DemonstrationIndex::build(embedder, train)?;
    let train_prompts = build_prompts(train, &index, embedder, &*model, &settings)?;
    let dev_prompts = build_prompts(dev, &index, embedder, &*model, &settings)?;

    let shape = HeadShape {
        n: settings.n_tokens,
        d_model: model.d_model(),
        d_h: config.d_h,
        m,
    };
    let mut head = VerbalizerHead::new(shape, config.seed.wrapping_add(1))?;
    let mut net = WeightingNet::zeros(m);
    let mut bank = MemoryBank::new(config.bank_capacity);
    let n_adapter = model.adapter_parameters().len();
    let mut opt_adapter = AdamW::new(n_adapter, config.lr, config.weight_decay);
    let mut opt_head = AdamW::new(shape.n_params(), config.lr, config.weight_decay);
    let mut opt_net = AdamW::new(net.n_params(), config.lr, config.weight_decay);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let mut order: Vec<usize> = (0..train_prompts.len()).collect();
    let mut step = 0usize;
    let mut zero_steps = 0usize;
    let mut best: Option<Best> = None;
    let mut epochs = Vec::new();
    'epochs: for epoch in 1..=config.epochs {
        order.shuffle(&mut rng);
        let (mut sum_ce, mut sum_con, mut sum_total, mut epoch_steps) = (0.0, 0.0, 0.0, 0usize);
        for batch in order.chunks(config.batch_size) {
            if config.max_steps.is_some_and(|max| step >= max) {
                break;
            }
            let bs = batch.len() as f64;
            let mut traces = Vec::with_capacity(batch.len());
            let mut outs = Vec::with_capacity(batch.len());
            let mut ys = Vec::with_capacity(batch.len());
            let mut l_ce = 0.0;
            let mut d_zs = Vec::with_capacity(batch.len());
            for &i in batch {
                let (text, gold) = &train_prompts[i];
                let (g, trace) = model.generate_traced(text, settings.n_tokens)?;
                let out = head.forward(&concat_hidden(&g.hidden_states)?)?;
                let (loss, mut d_z) = classification_loss(&out.z, gold, settings.mode)?;
                d_z.iter_mut().for_each(|v| *v /= bs);
                l_ce += loss / bs;
                d_zs.push(d_z);
                traces.push(trace);
                outs.push(out);
                ys.push(gold.clone());
            }
            let hs: Vec<Vec<f64>> = outs.iter().map(|o| o.h.clone()).collect();
            let snapshot = bank.snapshot();
            let con = match weighcon_loss(&hs, &ys, &snapshot, &net) {
                Ok(c) => Some(c),
                Err(Error::ZeroVector) => {
                    zero_steps += 1;
                    None
                }
                Err(e) => return Err(e),
            };
            let (l_con, n_pos, n_skip) = con
                .as_ref()
                .map_or((0.0, 0, 0), |c| (c.l_con, c.n_positive_pairs, c.n_skipped_terms));
            let breakdown = combined_loss(l_ce, l_con, lambda)?;

            let mut g_head = vec![0.0; shape.n_params()];
            let mut g_adapter = vec![0.0f32; n_adapter];
            for (k, out) in outs.iter().enumerate() {
                let extra: Option<Vec<f64>> = con
                    .as_ref()
                    .filter(|_| lambda > 0.0)
                    .map(|c| c.d_h[k].iter().map(|g| lambda * g).collect());
                let d_e = head.backward(out, &d_zs[k], extra.as_deref(), &mut g_head);
                if n_adapter > 0 {
                    let d_hidden: Vec<Vec<f32>> = d_e.chunks(shape.d_model).map(|c| c.iter().map(|&v| v as f32).collect()).collect();
                    let g = model.adapter_gradient(&traces[k], &d_hidden)?;
                    g_adapter.iter_mut().zip(&g).for_each(|(a, b)| *a += b);
                }
            }
            let g_net: Vec<f64> = match &con {
                Some(c) if lambda > 0.0 => c.d_net.iter().map(|g| lambda * g).collect(),
                _ => vec![0.0; net.n_params()],
            };
            let finite = breakdown.l_total.is_finite()
                && g_head.iter().all(|g| g.is_finite())
                && g_net.iter().all(|g| g.is_finite())
                && g_adapter.iter().all(|g| g.is_finite());
            if !finite {
                return Err(Error::Diverged {
                    step,
                    detail: format!("l_ce = {}, l_con = {}, l_total = {}", breakdown.l_ce, breakdown.l_con, breakdown.l_total),
                });
            }
            opt_head.step(head.params_mut(), &g_head);
            let mut net_flat = net.to_flat();
            opt_net.step(&mut net_flat, &g_net);
            net = WeightingNet::from_flat(&net_flat)?;
            if n_adapter > 0 {
                opt_adapter.step_f32(model.adapter_parameters_mut(), &g_adapter);
            }
            bank.push_batch(&hs, &ys)?;
            on_step(&StepTelemetry {
                step: step as u64,
                l_ce: breakdown.l_ce,
                l_con: breakdown.l_con,
                l_total: breakdown.l_total,
                n_positive_pairs: n_pos,
                n_skipped_terms: n_skip,
                bank_size: bank.len(),
            })?;
            sum_ce += breakdown.l_ce;
            sum_con += breakdown.l_con;
            sum_total += breakdown.l_total;
            epoch_steps += 1;
            step += 1;
        }

        let probs = predict_probs(&*model, &head, &dev_prompts, &settings)?;
        let gold: Vec<LabelVector> = dev_prompts.iter().map(|(_, g)| g.clone()).collect();
        let profile = match config.fixed_threshold {
            Some(tau) => ThresholdProfile::fixed(m, tau),
            None => tune_thresholds(&probs, &gold, config.grid, "dev")?,
        };
        let report = score(&probs, &dev_prompts, &profile, dev, settings.mode)?.with_config(config.echo());
        let metric = match config.selection {
            SelectionMetric::Micro => report.micro_f1,
            SelectionMetric::Macro => report.macro_f1,
        };
        let denom = epoch_steps.max(1) as f64;
        epochs.push(EpochSummary {
            epoch,
            steps: epoch_steps,
            mean_l_ce: sum_ce / denom,
            mean_l_con: sum_con / denom,
            mean_l_total: sum_total / denom,
            dev_micro_f1: report.micro_f1,
            dev_macro_f1: report.macro_f1,
        });
        if best.as_ref().is_none_or(|b| metric > b.metric) {
            best = Some(Best {
                metric,
                head: head.clone(),
                net: net.clone(),
                adapters: model.adapter_parameters().to_vec(),
                profile,
                report,
                epoch,
            });
        }
        if config.max_steps.is_some_and(|max| step >= max) {
            break 'epochs;
        }
    }

    let best = best.expect("at least one epoch ran");
    model.adapter_parameters_mut().copy_from_slice(&best.adapters);
    Ok(TrainOutcome {
        head: best.head,
        net: best.net,
        adapters: best.adapters,
        profile: best.profile,
        dev_report: best.report,
        best_epoch: best.epoch,
        epochs,
        steps: step,
        zero_representation_steps: zero_steps,
    })
}

/// Scores a trained head on `test`, retrieving demonstrations from `pool`.
pub fn evaluate_trained(
    model: &dyn LanguageModel,
    head: &VerbalizerHead,
    profile: &ThresholdProfile,
    pool: &Corpus,
    test: &Corpus,
    embedder: &dyn EmbeddingBackend,
    config: &TrainConfig,
) -> Result<EvalReport> {
    let settings = config.prompt_settings();
    let index = DemonstrationIndex::build(embedder, pool)?;
    let prompts = build_prompts(test, &index, embedder, model, &settings)?;
    let probs = predict_probs(model, head, &prompts, &settings)?;
    Ok(score(&probs, &prompts, profile, test, settings.mode)?.with_config(config.echo()))
}
