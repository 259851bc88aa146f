//! Command-line entry point. Every subcommand writes its outputs under a run
//! directory `<runs-dir>/<timestamp>-<config hash>` holding `config.json`
//! (the exact configuration and library version).

use std::ffi::OsString;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::backend::{BackendConfig, ExternalLm, GoldEchoBackend, LanguageModel, ToyTransformer, TrainableModel};
use crate::checkpoint::{write_thresholds, Checkpoint, CheckpointMeta};
use crate::config::{config_hash, RunConfig};
use crate::corpus::synthetic::{generate, SyntheticConfig};
use crate::corpus::{
    corpus_stats, kappa_report, load_corpus, stratified_split, write_corpus, AnnotationRound, Corpus,
};
use crate::error::{Error, Result};
use crate::evaluation::{
    build_prompts, columns_table, predict_probs, rows_table, run_icl, run_training, score, tune_thresholds,
    Ablation, EvalReport, ThresholdProfile, TrainConfig,
};
use crate::prompting::{assemble_prompt, TokenCounter, WhitespaceTokenizer};
use crate::retrieval::{backend_from_spec, embed, CachedEmbedding, DemonstrationIndex, EmbeddingBackend};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Parser)]
#[command(name = "ssclab", version, about = "Prompt-based multi-label sentence classification experiments")]
pub struct Cli {
    /// Directory in which run directories are created.
    #[arg(long, global = true, default_value = "runs")]
    pub runs_dir: PathBuf,

    /// TOML (or .json) run configuration; defaults apply to missing keys.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Overrides the configured embedding backend (`hashed-bow` or `external:<endpoint>`).
    #[arg(long, global = true)]
    pub embed_backend: Option<String>,

    /// JSONL embedding cache, read before and written after the run.
    #[arg(long, global = true)]
    pub embed_cache: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Validate a corpus file (or generate a synthetic one) and write it in canonical form.
    Ingest(IngestArgs),
    /// Print corpus statistics as JSON.
    Stats(StatsArgs),
    /// Cohen's kappa between two annotation rounds of the same documents.
    Kappa(KappaArgs),
    /// Stratified train/dev/test split.
    Split(SplitArgs),
    /// Render k-shot prompts for every sentence of a corpus as JSONL.
    BuildPrompts(BuildPromptsArgs),
    /// In-context evaluation over a sweep of shot counts.
    Icl(IclArgs),
    /// Fine-tune adapters, verbalizer head and weighting net; select on dev.
    Train(TrainArgs),
    /// Re-tune per-label thresholds of a checkpoint on a dev corpus.
    TuneThresholds(TuneArgs),
    /// Score a checkpoint on a test corpus.
    Evaluate(EvaluateArgs),
    /// Train and evaluate ablation arms side by side.
    Ablate(AblateArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct IngestArgs {
    /// Corpus JSONL to validate.
    #[arg(long, required_unless_present = "synthetic", conflicts_with = "synthetic")]
    pub input: Option<PathBuf>,
    /// Generate this many synthetic documents instead of reading a file.
    #[arg(long)]
    pub synthetic: Option<usize>,
    /// Seed for synthetic generation.
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Output path (defaults to corpus.jsonl in the run directory).
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct StatsArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    /// Also write a Markdown table.
    #[arg(long)]
    pub markdown: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct KappaArgs {
    /// Corpus labeled by the first annotator.
    #[arg(long)]
    pub round_a: PathBuf,
    /// The same documents labeled by the second annotator.
    #[arg(long)]
    pub round_b: PathBuf,
}

fn parse_ratios(s: &str) -> std::result::Result<(f64, f64, f64), String> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("`{p}`: {e}")))
        .collect::<std::result::Result<_, _>>()?;
    match parts[..] {
        [a, b, c] => Ok((a, b, c)),
        _ => Err("expected three comma-separated ratios".into()),
    }
}

#[derive(Debug, Args, Serialize)]
pub struct SplitArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    /// Train,dev,test ratios (defaults to the configured ratios).
    #[arg(long, value_parser = parse_ratios)]
    pub ratios: Option<(f64, f64, f64)>,
    /// Shuffle seed (defaults to the configured split seed).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Where to write train/dev/test.jsonl (defaults to the run directory).
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TokenizerChoice {
    /// Byte tokenizer of the toy backend.
    Byte,
    /// Whitespace-separated words.
    Whitespace,
}

#[derive(Debug, Args, Serialize)]
pub struct BuildPromptsArgs {
    /// Corpus whose sentences become queries.
    #[arg(long)]
    pub corpus: PathBuf,
    /// Corpus supplying demonstrations.
    #[arg(long)]
    pub pool: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub shots: usize,
    #[arg(long, default_value_t = 1200)]
    pub budget: usize,
    #[arg(long, value_enum, default_value_t = TokenizerChoice::Byte)]
    pub tokenizer: TokenizerChoice,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BackendChoice {
    /// Whatever the configuration selects.
    Config,
    /// Answer with the gold labels (pipeline identity check).
    GoldEcho,
}

#[derive(Debug, Args, Serialize)]
pub struct IclArgs {
    #[arg(long)]
    pub test: PathBuf,
    /// Demonstration pool.
    #[arg(long)]
    pub train: PathBuf,
    /// Comma-separated shot counts.
    #[arg(long, value_delimiter = ',', default_value = "0,1,5,10")]
    pub shots: Vec<usize>,
    #[arg(long, value_enum, default_value_t = BackendChoice::Config)]
    pub backend: BackendChoice,
}

#[derive(Debug, Args, Serialize)]
pub struct TrainArgs {
    #[arg(long)]
    pub train: PathBuf,
    #[arg(long)]
    pub dev: PathBuf,
    /// Optional test corpus scored with the selected checkpoint.
    #[arg(long)]
    pub test: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct TuneArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    #[arg(long)]
    pub dev: PathBuf,
    /// Demonstration pool (the training corpus).
    #[arg(long)]
    pub pool: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    #[arg(long)]
    pub test: PathBuf,
    /// Demonstration pool (the training corpus).
    #[arg(long)]
    pub pool: PathBuf,
    /// Thresholds file from tune-thresholds (defaults to the checkpoint's).
    #[arg(long, conflicts_with = "fixed_threshold")]
    pub thresholds: Option<PathBuf>,
    /// Use one threshold for every label, e.g. 0.4.
    #[arg(long)]
    pub fixed_threshold: Option<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct AblateArgs {
    #[arg(long)]
    pub train: PathBuf,
    #[arg(long)]
    pub dev: PathBuf,
    #[arg(long)]
    pub test: PathBuf,
    /// Comma-separated arms: full, no-weighcon, no-demonstration, no-space-thinking.
    #[arg(long, value_delimiter = ',', default_value = "full,no-weighcon,no-demonstration,no-space-thinking")]
    pub arms: Vec<String>,
}

/// Parses arguments and runs; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(_) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

#[derive(Serialize)]
struct Echo<'a> {
    version: &'a str,
    command: &'a Command,
    embed_backend: &'a str,
    run_config: &'a RunConfig,
}

struct Run {
    dir: PathBuf,
    config: RunConfig,
}

impl Run {
    fn create(cli: &Cli) -> Result<Self> {
        let mut config = match &cli.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if let Some(spec) = &cli.embed_backend {
            config.embed_backend = spec.clone();
        }
        let echo = Echo {
            version: VERSION,
            command: &cli.command,
            embed_backend: &config.embed_backend,
            run_config: &config,
        };
        let stamp = chrono::Utc::now().format("%Y%m%dT%H%M%SZ");
        let base = format!("{stamp}-{}", config_hash(&echo));
        let mut dir = cli.runs_dir.join(&base);
        let mut n = 1;
        while dir.exists() {
            n += 1;
            dir = cli.runs_dir.join(format!("{base}-{n}"));
        }
        fs::create_dir_all(&dir)?;
        write_json(&dir.join("config.json"), &echo)?;
        Ok(Self { dir, config })
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }
}

/// Prints to stdout, ignoring a closed pipe.
fn emit(text: &str) {
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(text.as_bytes());
    if !text.ends_with('\n') {
        let _ = out.write_all(b"\n");
    }
}

fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

struct JsonlWriter(BufWriter<fs::File>);

impl JsonlWriter {
    fn create(path: &Path) -> Result<Self> {
        Ok(Self(BufWriter::new(fs::File::create(path)?)))
    }

    fn write<T: Serialize>(&mut self, value: &T) -> Result<()> {
        serde_json::to_writer(&mut self.0, value)?;
        self.0.write_all(b"\n")?;
        // Flushed per line so a failed run keeps what it produced.
        self.0.flush()?;
        Ok(())
    }
}

fn embedder(cli: &Cli, config: &RunConfig) -> Result<CachedEmbedding<Box<dyn EmbeddingBackend>>> {
    let inner = backend_from_spec(&config.embed_backend)?;
    match &cli.embed_cache {
        Some(path) => CachedEmbedding::load(inner, path),
        None => Ok(CachedEmbedding::new(inner)),
    }
}

fn save_cache(cli: &Cli, cache: &CachedEmbedding<Box<dyn EmbeddingBackend>>) -> Result<()> {
    match &cli.embed_cache {
        Some(path) => cache.save(path),
        None => Ok(()),
    }
}

fn toy_model(config: &RunConfig) -> Result<ToyTransformer> {
    match &config.backend {
        BackendConfig::Toy(c) => {
            let mut model = ToyTransformer::new(c.clone())?;
            model.attach_adapters(config.adapter_seed);
            Ok(model)
        }
        other => Err(Error::InvalidArgument(format!(
            "this subcommand needs a trainable backend; configured: {other:?}"
        ))),
    }
}

fn inference_model(config: &RunConfig, eval: &Corpus) -> Result<Box<dyn LanguageModel>> {
    Ok(match &config.backend {
        BackendConfig::Toy(_) => Box::new(toy_model(config)?),
        BackendConfig::External {
            endpoint,
            model,
            context_limit,
        } => Box::new(ExternalLm::connect(endpoint, model, *context_limit)?),
        BackendConfig::GoldEcho => Box::new(GoldEchoBackend::from_corpus(eval)?),
    })
}

/// Runs a parsed command; returns the run directory.
pub fn execute(cli: &Cli) -> Result<PathBuf> {
    let run = Run::create(cli)?;
    match &cli.command {
        Command::Ingest(a) => ingest(&run, a)?,
        Command::Stats(a) => stats(&run, a)?,
        Command::Kappa(a) => kappa(&run, a)?,
        Command::Split(a) => split(&run, a)?,
        Command::BuildPrompts(a) => build_prompts_cmd(cli, &run, a)?,
        Command::Icl(a) => icl(cli, &run, a)?,
        Command::Train(a) => train(cli, &run, a)?,
        Command::TuneThresholds(a) => tune(cli, &run, a)?,
        Command::Evaluate(a) => evaluate(cli, &run, a)?,
        Command::Ablate(a) => ablate(cli, &run, a)?,
    }
    Ok(run.dir)
}

fn ingest(run: &Run, a: &IngestArgs) -> Result<()> {
    let corpus = match (&a.input, a.synthetic) {
        (Some(path), _) => load_corpus(path)?,
        (None, Some(n)) => generate(&SyntheticConfig {
            n_docs: n,
            seed: a.seed,
            ..Default::default()
        }),
        (None, None) => return Err(Error::InvalidArgument("--input or --synthetic is required".into())),
    };
    let out = a.output.clone().unwrap_or_else(|| run.path("corpus.jsonl"));
    write_corpus(&corpus, &out)?;
    emit(&format!("{} documents, {} sentences -> {}", corpus.documents.len(), corpus.n_sentences(), out.display()));
    Ok(())
}

fn stats(run: &Run, a: &StatsArgs) -> Result<()> {
    let s = corpus_stats(&load_corpus(&a.corpus)?);
    write_json(&run.path("stats.json"), &s)?;
    if a.markdown {
        fs::write(run.path("stats.md"), s.to_markdown())?;
    }
    emit(&serde_json::to_string_pretty(&s)?);
    Ok(())
}

fn annotator_id(path: &Path) -> String {
    path.file_stem().map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned())
}

fn kappa(run: &Run, a: &KappaArgs) -> Result<()> {
    let ca = load_corpus(&a.round_a)?;
    let cb = load_corpus(&a.round_b)?;
    if ca.label_set != cb.label_set {
        return Err(Error::InvalidLabelSet("annotation rounds use different label sets".into()));
    }
    let ra = AnnotationRound::from_corpus(annotator_id(&a.round_a), &ca);
    let rb = AnnotationRound::from_corpus(annotator_id(&a.round_b), &cb);
    rb.validate_against(&ca)?;
    let report = kappa_report(&ra, &rb, &ca.label_set)?;
    write_json(&run.path("kappa.json"), &report)?;
    emit(&serde_json::to_string_pretty(&report)?);
    Ok(())
}

fn split(run: &Run, a: &SplitArgs) -> Result<()> {
    let corpus = load_corpus(&a.corpus)?;
    let ratios = a.ratios.unwrap_or(run.config.split_ratios);
    let seed = a.seed.unwrap_or(run.config.split_seed);
    let (tr, dv, te) = stratified_split(&corpus, ratios, seed)?;
    let dir = a.out_dir.clone().unwrap_or_else(|| run.dir.clone());
    fs::create_dir_all(&dir)?;
    for (name, c) in [("train", &tr), ("dev", &dv), ("test", &te)] {
        write_corpus(c, dir.join(format!("{name}.jsonl")))?;
    }
    let sizes = serde_json::json!({
        "train": tr.documents.len(),
        "dev": dv.documents.len(),
        "test": te.documents.len(),
    });
    write_json(&run.path("split.json"), &sizes)?;
    emit(&sizes.to_string());
    Ok(())
}

fn build_prompts_cmd(cli: &Cli, run: &Run, a: &BuildPromptsArgs) -> Result<()> {
    let corpus = load_corpus(&a.corpus)?;
    let pool = load_corpus(&a.pool)?;
    let emb = embedder(cli, &run.config)?;
    let index = DemonstrationIndex::build(&emb, &pool)?;
    let byte = crate::backend::ByteTokenizer;
    let tokenizer: &dyn TokenCounter = match a.tokenizer {
        TokenizerChoice::Byte => &byte,
        TokenizerChoice::Whitespace => &WhitespaceTokenizer,
    };
    let mut out = JsonlWriter::create(&run.path("prompts.jsonl"))?;
    for (doc, s) in corpus.sentences() {
        let demos: Vec<_> = if a.shots == 0 {
            Vec::new()
        } else {
            let target = embed(&emb, &s.text)?;
            index
                .rank(&target, a.shots, Some(&doc.doc_id))
                .documents
                .iter()
                .map(|r| &pool.documents[r.pool_index])
                .collect()
        };
        let prompt = assemble_prompt(&demos, doc, s.index, &corpus.label_set, a.budget, tokenizer)?;
        out.write(&prompt)?;
    }
    save_cache(cli, &emb)?;
    emit(&run.path("prompts.jsonl").display().to_string());
    Ok(())
}

fn icl(cli: &Cli, run: &Run, a: &IclArgs) -> Result<()> {
    let test = load_corpus(&a.test)?;
    let train = load_corpus(&a.train)?;
    let emb = embedder(cli, &run.config)?;
    let mut config = run.config.clone();
    if let BackendChoice::GoldEcho = a.backend {
        config.backend = BackendConfig::GoldEcho;
    }
    let backend = inference_model(&config, &test)?;
    let mut reports = Vec::new();
    for &k in &a.shots {
        let mut icl = config.icl.clone();
        icl.shots = k;
        let mut traces = JsonlWriter::create(&run.path(&format!("traces-{k}shot.jsonl")))?;
        let report = run_icl(&test, &train, backend.as_ref(), &emb, &icl, &mut |t| traces.write(t))?;
        reports.push((format!("{k}-shot"), report));
    }
    save_cache(cli, &emb)?;
    let named: Vec<(String, &EvalReport)> = reports.iter().map(|(n, r)| (n.clone(), r)).collect();
    write_json(&run.path("icl.json"), &reports)?;
    let table = columns_table(&named);
    fs::write(run.path("icl.md"), &table)?;
    emit(&table);
    Ok(())
}

fn train_arm(
    run: &Run,
    emb: &dyn EmbeddingBackend,
    train: &Corpus,
    dev: &Corpus,
    config: &TrainConfig,
    telemetry: &Path,
) -> Result<(ToyTransformer, Checkpoint)> {
    let mut model = toy_model(&run.config)?;
    let mut tel = JsonlWriter::create(telemetry)?;
    let outcome = run_training(&mut model, train, dev, emb, config, &mut |s| tel.write(s))?;
    let ckpt = Checkpoint {
        meta: CheckpointMeta {
            version: VERSION.to_string(),
            backend: run.config.backend.clone(),
            adapter_seed: run.config.adapter_seed,
            label_set: train.label_set.clone(),
            train: config.clone(),
            best_epoch: outcome.best_epoch,
        },
        head: outcome.head,
        adapters: outcome.adapters,
        net: outcome.net,
        profile: outcome.profile,
    };
    write_json(
        &telemetry.with_file_name(format!(
            "{}epochs.json",
            telemetry.file_name().unwrap().to_string_lossy().trim_end_matches("telemetry.jsonl")
        )),
        &outcome.epochs,
    )?;
    Ok((model, ckpt))
}

fn score_corpus(
    model: &dyn LanguageModel,
    ckpt: &Checkpoint,
    profile: &ThresholdProfile,
    pool: &Corpus,
    eval: &Corpus,
    emb: &dyn EmbeddingBackend,
) -> Result<EvalReport> {
    let settings = ckpt.meta.train.prompt_settings();
    let index = DemonstrationIndex::build(emb, pool)?;
    let prompts = build_prompts(eval, &index, emb, model, &settings)?;
    let probs = predict_probs(model, &ckpt.head, &prompts, &settings)?;
    Ok(score(&probs, &prompts, profile, eval, settings.mode)?.with_config(ckpt.meta.train.echo()))
}

fn train(cli: &Cli, run: &Run, a: &TrainArgs) -> Result<()> {
    let train = load_corpus(&a.train)?;
    let dev = load_corpus(&a.dev)?;
    let emb = embedder(cli, &run.config)?;
    let (model, ckpt) = train_arm(run, &emb, &train, &dev, &run.config.train, &run.path("telemetry.jsonl"))?;
    ckpt.save(run.path("checkpoint"))?;
    let dev_report = score_corpus(&model, &ckpt, &ckpt.profile, &train, &dev, &emb)?;
    write_json(&run.path("dev_report.json"), &dev_report)?;
    let mut rows = vec![("dev".to_string(), dev_report)];
    if let Some(path) = &a.test {
        let test = load_corpus(path)?;
        let report = score_corpus(&model, &ckpt, &ckpt.profile, &train, &test, &emb)?;
        write_json(&run.path("test_report.json"), &report)?;
        rows.push(("test".to_string(), report));
    }
    save_cache(cli, &emb)?;
    let named: Vec<(String, &EvalReport)> = rows.iter().map(|(n, r)| (n.clone(), r)).collect();
    let table = rows_table(&named);
    fs::write(run.path("report.md"), &table)?;
    emit(&table);
    Ok(())
}

fn load_trained(path: &Path) -> Result<(ToyTransformer, Checkpoint)> {
    let ckpt = Checkpoint::load(path)?;
    let config = RunConfig {
        backend: ckpt.meta.backend.clone(),
        adapter_seed: ckpt.meta.adapter_seed,
        ..RunConfig::default()
    };
    let mut model = toy_model(&config)?;
    if model.adapter_parameters().len() != ckpt.adapters.len() {
        return Err(Error::Shape(format!(
            "checkpoint has {} adapter parameters, backend expects {}",
            ckpt.adapters.len(),
            model.adapter_parameters().len()
        )));
    }
    model.adapter_parameters_mut().copy_from_slice(&ckpt.adapters);
    Ok((model, ckpt))
}

fn tune(cli: &Cli, run: &Run, a: &TuneArgs) -> Result<()> {
    let (model, ckpt) = load_trained(&a.checkpoint)?;
    let dev = load_corpus(&a.dev)?;
    let pool = load_corpus(&a.pool)?;
    let emb = embedder(cli, &run.config)?;
    let settings = ckpt.meta.train.prompt_settings();
    let index = DemonstrationIndex::build(&emb, &pool)?;
    let prompts = build_prompts(&dev, &index, &emb, &model, &settings)?;
    let probs = predict_probs(&model, &ckpt.head, &prompts, &settings)?;
    let gold: Vec<_> = prompts.iter().map(|(_, g)| g.clone()).collect();
    let profile = tune_thresholds(&probs, &gold, ckpt.meta.train.grid, &a.dev.display().to_string())?;
    write_thresholds(&run.path("thresholds.json"), &profile)?;
    let report = score(&probs, &prompts, &profile, &dev, settings.mode)?.with_config(ckpt.meta.train.echo());
    write_json(&run.path("dev_report.json"), &report)?;
    save_cache(cli, &emb)?;
    emit(&serde_json::to_string_pretty(&profile)?);
    Ok(())
}

fn evaluate(cli: &Cli, run: &Run, a: &EvaluateArgs) -> Result<()> {
    let (model, ckpt) = load_trained(&a.checkpoint)?;
    let test = load_corpus(&a.test)?;
    let pool = load_corpus(&a.pool)?;
    let emb = embedder(cli, &run.config)?;
    let profile = match (&a.thresholds, a.fixed_threshold) {
        (Some(path), _) => crate::checkpoint::read_thresholds(path)?,
        (None, Some(tau)) => ThresholdProfile::fixed(ckpt.head.shape().m, tau),
        (None, None) => ckpt.profile.clone(),
    };
    let report = score_corpus(&model, &ckpt, &profile, &pool, &test, &emb)?;
    save_cache(cli, &emb)?;
    write_json(&run.path("report.json"), &report)?;
    let table = rows_table(&[("model".to_string(), &report)]);
    fs::write(run.path("report.md"), &table)?;
    emit(&table);
    Ok(())
}

fn arm_label(arm: &str) -> String {
    match arm {
        "full" => "full".into(),
        "no-weighcon" => "w/o WeighCon".into(),
        "no-demonstration" => "w/o Demonstration".into(),
        "no-space-thinking" => "w/o Space Thinking".into(),
        other => other.into(),
    }
}

fn ablate(cli: &Cli, run: &Run, a: &AblateArgs) -> Result<()> {
    let train = load_corpus(&a.train)?;
    let dev = load_corpus(&a.dev)?;
    let test = load_corpus(&a.test)?;
    let emb = embedder(cli, &run.config)?;
    let arms: Vec<Ablation> = a.arms.iter().map(|s| Ablation::from_arm(s)).collect::<Result<_>>()?;
    let mut rows = Vec::new();
    for (name, ablation) in a.arms.iter().zip(arms) {
        let config = TrainConfig {
            ablation,
            ..run.config.train.clone()
        };
        let (model, ckpt) = train_arm(run, &emb, &train, &dev, &config, &run.path(&format!("{name}-telemetry.jsonl")))?;
        let report = score_corpus(&model, &ckpt, &ckpt.profile, &train, &test, &emb)?;
        rows.push((arm_label(name), report));
    }
    save_cache(cli, &emb)?;
    write_json(&run.path("ablation.json"), &rows)?;
    let named: Vec<(String, &EvalReport)> = rows.iter().map(|(n, r)| (n.clone(), r)).collect();
    let table = rows_table(&named);
    fs::write(run.path("ablation.md"), &table)?;
    emit(&table);
    Ok(())
}
