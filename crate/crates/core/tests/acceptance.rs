//! Acceptance gate. Runs every criterion in sequence (so runtime limits are
//! measured without competing tests) and prints one PASS/FAIL line each.
//!
//! `cargo test -p ssclab --test acceptance`

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::time::{Duration, Instant};

use rand::Rng;
use ssclab::backend::{ByteTokenizer, GoldEchoBackend, LanguageModel, ToyConfig, ToyTransformer, TrainableModel};
use ssclab::corpus::synthetic::{generate, SyntheticConfig};
use ssclab::corpus::{
    cohens_kappa, corpus_stats, kappa_from_counts, load_corpus, stratified_split, AnnotationRound, Corpus, Document,
    LabelMode, LabelSet, LabelVector, SourceKind,
};
use ssclab::evaluation::{
    evaluate_trained, f1_scores, run_icl, run_training, tune_thresholds, IclConfig, ThresholdGrid, TrainConfig,
};
use ssclab::prompting::{assemble_prompt, render_demonstration, render_query, TokenCounter, WhitespaceTokenizer};
use ssclab::retrieval::HashedBagOfWords;
use ssclab::verbalizer::{classification_loss, HeadShape, VerbalizerHead};
use ssclab::weighcon::{combined_loss, weighcon_loss, BankEntry, WeightingNet};

use common::{f1_oracle, kappa_oracle, rng, thresholds_oracle, ConInstance};

type Outcome = Result<String, String>;

fn check(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn manifest_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

// ---------------------------------------------------------------------------

fn weighcon_oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let mut r = rng(2024);
    let mut worst = 0.0f64;
    for case in 0..200 {
        let inst = ConInstance::random(&mut r, 6, 4, 3, 8);
        let out = weighcon_loss(&inst.h, &inst.labels(), &inst.bank(), &inst.net()).map_err(|e| e.to_string())?;
        let err = (out.l_con - inst.oracle()).abs();
        worst = worst.max(err);
        check(err <= 1e-6, format!("case {case}: library {} vs oracle {}", out.l_con, inst.oracle()))?;
    }
    let elapsed = start.elapsed();
    check(elapsed < Duration::from_secs(5), format!("took {elapsed:?}"))?;
    Ok(format!("200 instances, max abs error {worst:.2e}, {:.2}s", elapsed.as_secs_f64()))
}

// ---------------------------------------------------------------------------

struct GradCase {
    es: Vec<Vec<f64>>,
    ys: Vec<LabelVector>,
    bank: Vec<BankEntry>,
    head: VerbalizerHead,
    net: WeightingNet,
    lambda: f64,
}

impl GradCase {
    fn random(r: &mut rand_chacha::ChaCha8Rng) -> Self {
        loop {
            let m = r.random_range(1..=3);
            let nb = r.random_range(1..=6);
            let nk = r.random_range(0..=4);
            let shape = HeadShape {
                n: 2,
                d_model: 3,
                d_h: 8,
                m,
            };
            let mut head = VerbalizerHead::new(shape, r.random()).unwrap();
            // Positive biases keep most hidden units active.
            for b in head.b1_mut() {
                *b = r.random_range(0.1..0.5);
            }
            for b in head.b2_mut() {
                *b = r.random_range(-0.5..0.5);
            }
            let es: Vec<Vec<f64>> = (0..nb)
                .map(|_| (0..shape.input_dim()).map(|_| r.random_range(-1.0..1.0)).collect())
                .collect();
            let label = |r: &mut rand_chacha::ChaCha8Rng| {
                LabelVector::from_bits((0..m).map(|_| r.random_bool(0.6)).collect())
            };
            let ys: Vec<LabelVector> = (0..nb).map(|_| label(r)).collect();
            let bank = (0..nk)
                .map(|s| BankEntry {
                    h: (0..shape.d_h).map(|_| r.random_range(0.0..1.0)).collect(),
                    y: label(r),
                    step: s as u64,
                })
                .collect();
            let net = WeightingNet {
                w: (0..2 * m).map(|_| r.random_range(-1.0..1.0)).collect(),
                b: r.random_range(-0.5..0.5),
            };
            let case = Self {
                es,
                ys,
                bank,
                head,
                net,
                lambda: r.random_range(0.05..1.0),
            };
            // Skip instances with a dead representation or a unit within a
            // finite-difference step of its ReLU kink.
            let live = case.es.iter().all(|e| {
                let out = case.head.forward(e).unwrap();
                let pre_ok = (0..shape.d_h).all(|row| {
                    let w = &case.head.w1()[row * shape.input_dim()..(row + 1) * shape.input_dim()];
                    let a = case.head.b1()[row] + w.iter().zip(e).map(|(w, x)| w * x).sum::<f64>();
                    a.abs() > 1e-3
                });
                pre_ok && out.h.iter().any(|&v| v > 0.0)
            });
            if live {
                return case;
            }
        }
    }

    fn loss(&self, es: &[Vec<f64>], head: &VerbalizerHead, net: &WeightingNet) -> f64 {
        let nb = es.len() as f64;
        let mut l_ce = 0.0;
        let mut hs = Vec::new();
        for (e, y) in es.iter().zip(&self.ys) {
            let out = head.forward(e).unwrap();
            l_ce += classification_loss(&out.z, y, LabelMode::Multi).unwrap().0 / nb;
            hs.push(out.h);
        }
        let l_con = weighcon_loss(&hs, &self.ys, &self.bank, net).unwrap().l_con;
        combined_loss(l_ce, l_con, self.lambda).unwrap().l_total
    }

    /// Analytic gradients: (d e, d head, d net).
    fn analytic(&self) -> (Vec<Vec<f64>>, Vec<f64>, Vec<f64>) {
        let nb = self.es.len() as f64;
        let outs: Vec<_> = self.es.iter().map(|e| self.head.forward(e).unwrap()).collect();
        let hs: Vec<Vec<f64>> = outs.iter().map(|o| o.h.clone()).collect();
        let con = weighcon_loss(&hs, &self.ys, &self.bank, &self.net).unwrap();
        let mut g_head = vec![0.0; self.head.params().len()];
        let mut d_es = Vec::new();
        for (i, (out, y)) in outs.iter().zip(&self.ys).enumerate() {
            let (_, mut d_z) = classification_loss(&out.z, y, LabelMode::Multi).unwrap();
            d_z.iter_mut().for_each(|v| *v /= nb);
            let extra: Vec<f64> = con.d_h[i].iter().map(|v| v * self.lambda).collect();
            d_es.push(self.head.backward(out, &d_z, Some(&extra), &mut g_head));
        }
        let g_net = con.d_net.iter().map(|v| v * self.lambda).collect();
        (d_es, g_head, g_net)
    }
}

const FD_STEP: f64 = 1e-5;
const GRAD_RTOL: f64 = 1e-4;
const GRAD_ATOL: f64 = 1e-8;

fn central<F: FnMut(f64) -> f64>(x: f64, mut f: F) -> f64 {
    (f(x + FD_STEP) - f(x - FD_STEP)) / (2.0 * FD_STEP)
}

/// Tracks the worst relative error and fails on the first violation.
struct GradStats {
    worst: f64,
    n: usize,
}

impl GradStats {
    fn compare(&mut self, what: &str, fd: f64, an: f64) -> Result<(), String> {
        self.n += 1;
        let diff = (fd - an).abs();
        if fd.abs() > 1e-6 {
            self.worst = self.worst.max(diff / fd.abs());
        }
        check(
            diff <= GRAD_ATOL + GRAD_RTOL * fd.abs(),
            format!("{what}: finite difference {fd:e} vs analytic {an:e}"),
        )
    }
}

fn gradient_checks() -> Outcome {
    let start = Instant::now();
    let mut r = rng(77);
    let mut stats = GradStats { worst: 0.0, n: 0 };
    for case_no in 0..50 {
        let case = GradCase::random(&mut r);
        let (d_es, g_head, g_net) = case.analytic();

        for i in 0..case.es.len() {
            for t in 0..case.es[i].len() {
                let fd = central(case.es[i][t], |v| {
                    let mut es = case.es.clone();
                    es[i][t] = v;
                    case.loss(&es, &case.head, &case.net)
                });
                stats.compare(&format!("case {case_no} e[{i}][{t}]"), fd, d_es[i][t])?;
            }
        }
        for p in 0..g_head.len() {
            let fd = central(case.head.params()[p], |v| {
                let mut head = case.head.clone();
                head.params_mut()[p] = v;
                case.loss(&case.es, &head, &case.net)
            });
            stats.compare(&format!("case {case_no} head[{p}]"), fd, g_head[p])?;
        }
        let flat = case.net.to_flat();
        for p in 0..flat.len() {
            let fd = central(flat[p], |v| {
                let mut f = flat.clone();
                f[p] = v;
                case.loss(&case.es, &case.head, &WeightingNet::from_flat(&f).unwrap())
            });
            stats.compare(&format!("case {case_no} net[{p}]"), fd, g_net[p])?;
        }

        // The contrastive term on its own, w.r.t. the representations.
        let hs: Vec<Vec<f64>> = case.es.iter().map(|e| case.head.forward(e).unwrap().h).collect();
        let con = weighcon_loss(&hs, &case.ys, &case.bank, &case.net).unwrap();
        for i in 0..hs.len() {
            for t in 0..hs[i].len() {
                if hs[i][t] == 0.0 {
                    continue;
                }
                let fd = central(hs[i][t], |v| {
                    let mut h = hs.clone();
                    h[i][t] = v;
                    weighcon_loss(&h, &case.ys, &case.bank, &case.net).unwrap().l_con
                });
                stats.compare(&format!("case {case_no} h[{i}][{t}]"), fd, con.d_h[i][t])?;
            }
        }
    }
    let elapsed = start.elapsed();
    check(elapsed < Duration::from_secs(30), format!("took {elapsed:?}"))?;
    Ok(format!(
        "50 instances, {} coordinates, max relative error {:.2e}, {:.2}s",
        stats.n,
        stats.worst,
        elapsed.as_secs_f64()
    ))
}

// ---------------------------------------------------------------------------

fn invariance_suite() -> Outcome {
    let mut r = rng(5);
    let mut worst = 0.0f64;
    for case in 0..200 {
        let inst = ConInstance::random(&mut r, 6, 4, 3, 8);
        let y = inst.labels();
        let bank = inst.bank();
        let net = inst.net();
        let base = weighcon_loss(&inst.h, &y, &bank, &net).map_err(|e| e.to_string())?.l_con;

        let i = r.random_range(0..inst.h.len());
        let s = 10f64.powf(r.random_range(-2.0..2.0));
        let mut scaled = inst.h.clone();
        scaled[i].iter_mut().for_each(|v| *v *= s);
        let l = weighcon_loss(&scaled, &y, &bank, &net).unwrap().l_con;
        worst = worst.max((l - base).abs());
        check((l - base).abs() <= 1e-9, format!("case {case}: scaling h[{i}] by {s} moved l_con {base} -> {l}"))?;

        let mut perm: Vec<usize> = (0..inst.h.len()).collect();
        for k in (1..perm.len()).rev() {
            perm.swap(k, r.random_range(0..=k));
        }
        let ph: Vec<Vec<f64>> = perm.iter().map(|&k| inst.h[k].clone()).collect();
        let py: Vec<LabelVector> = perm.iter().map(|&k| y[k].clone()).collect();
        let l = weighcon_loss(&ph, &py, &bank, &net).unwrap().l_con;
        worst = worst.max((l - base).abs());
        check((l - base).abs() <= 1e-9, format!("case {case}: batch permutation moved l_con {base} -> {l}"))?;
    }
    Ok(format!("200 instances, max deviation {worst:.2e}"))
}

// ---------------------------------------------------------------------------

fn random_bits(r: &mut rand_chacha::ChaCha8Rng, n: usize, m: usize, p: f64) -> Vec<Vec<bool>> {
    (0..n).map(|_| (0..m).map(|_| r.random_bool(p)).collect()).collect()
}

fn to_vectors(bits: &[Vec<bool>]) -> Vec<LabelVector> {
    bits.iter().map(|b| LabelVector::from_bits(b.clone())).collect()
}

fn label_set(m: usize) -> LabelSet {
    LabelSet::new((0..m).map(|c| format!("L{c}"))).unwrap()
}

fn metric_oracles() -> Outcome {
    let mut r = rng(11);
    for case in 0..500 {
        let n = r.random_range(1..=40);
        let m = r.random_range(1..=6);
        let labels = label_set(m);
        let gold = random_bits(&mut r, n, m, 0.3);
        let density = r.random_range(0.05..0.6);
        let pred = random_bits(&mut r, n, m, density);
        let report = f1_scores(&to_vectors(&pred), &to_vectors(&gold), &labels).map_err(|e| e.to_string())?;
        let (micro, macro_) = f1_oracle(&pred, &gold, m);
        for (c, s) in report.per_label.iter().enumerate() {
            let (tp, fp, fn_) = common::confusion(&pred, &gold, c);
            check(
                (s.counts.tp, s.counts.fp, s.counts.fn_) == (tp, fp, fn_),
                format!("case {case}: label {c} counts differ"),
            )?;
        }
        check(
            (report.micro_f1 - micro).abs() <= 1e-12 && (report.macro_f1 - macro_).abs() <= 1e-12,
            format!("case {case}: f1 ({}, {}) vs oracle ({micro}, {macro_})", report.micro_f1, report.macro_f1),
        )?;

        let probs: Vec<Vec<f64>> = (0..n)
            .map(|_| {
                (0..m)
                    .map(|_| {
                        // Mix of grid-aligned and arbitrary values to exercise >= at the boundary.
                        if r.random_bool(0.3) {
                            r.random_range(0..=20) as f64 * 0.05
                        } else {
                            r.random_range(0.0..1.0)
                        }
                    })
                    .collect()
            })
            .collect();
        let profile =
            tune_thresholds(&probs, &to_vectors(&gold), ThresholdGrid::default(), "oracle").map_err(|e| e.to_string())?;
        let expected = thresholds_oracle(&probs, &gold, m);
        check(
            profile.thresholds == expected,
            format!("case {case}: thresholds {:?} vs oracle {expected:?}", profile.thresholds),
        )?;
    }

    check(kappa_from_counts(25, 25, 25, 25).abs() <= 1e-9, "balanced 2x2 table is not 0")?;
    let mut worst = 0.0f64;
    for case in 0..100 {
        let m = r.random_range(1..=4);
        let labels = label_set(m);
        let n_docs = r.random_range(2..=8);
        let mut da = Vec::new();
        let mut db = Vec::new();
        for d in 0..n_docs {
            let len = r.random_range(1..=6);
            let mut a = random_bits(&mut r, len, m, 0.4);
            let mut b: Vec<Vec<bool>> = a
                .iter()
                .map(|row| row.iter().map(|&v| if r.random_bool(0.2) { !v } else { v }).collect())
                .collect();
            // Every sentence needs at least one label.
            for row in a.iter_mut().chain(b.iter_mut()) {
                if !row.contains(&true) {
                    row[r.random_range(0..m)] = true;
                }
            }
            let doc = |bits: &[Vec<bool>]| {
                Document::new(
                    format!("d{d}"),
                    SourceKind::Unstructured,
                    bits.iter()
                        .enumerate()
                        .map(|(k, v)| (format!("s{k}"), LabelVector::from_bits(v.clone()))),
                )
            };
            da.push((a.clone(), doc(&a)));
            db.push((b.clone(), doc(&b)));
        }
        let ca = Corpus::new(labels.clone(), da.iter().map(|(_, d)| d.clone()).collect()).unwrap();
        let cb = Corpus::new(labels.clone(), db.iter().map(|(_, d)| d.clone()).collect()).unwrap();
        let ra = AnnotationRound::from_corpus("a", &ca);
        let rb = AnnotationRound::from_corpus("b", &cb);
        let ra_same = AnnotationRound::from_corpus("a2", &ca);
        for c in 0..m {
            let xa: Vec<bool> = da.iter().flat_map(|(bits, _)| bits.iter().map(|row| row[c])).collect();
            let xb: Vec<bool> = db.iter().flat_map(|(bits, _)| bits.iter().map(|row| row[c])).collect();
            let k = cohens_kappa(&ra, &rb, &labels, labels.name(c)).map_err(|e| e.to_string())?;
            let same = cohens_kappa(&ra, &ra_same, &labels, labels.name(c)).unwrap();
            check((same - 1.0).abs() <= 1e-9, format!("case {case}: identical rounds give {same}"))?;
            let degenerate = xa.iter().all(|&v| v == xa[0]) && xb.iter().all(|&v| v == xb[0]);
            if degenerate {
                continue;
            }
            let expected = kappa_oracle(&xa, &xb);
            worst = worst.max((k - expected).abs());
            check((k - expected).abs() <= 1e-9, format!("case {case}: kappa {k} vs closed form {expected}"))?;
        }
    }
    Ok(format!("500 metric/threshold instances exact; kappa max deviation {worst:.2e}"))
}

// ---------------------------------------------------------------------------

fn prompt_golden_files() -> Outcome {
    let fixtures = manifest_dir().join("tests/fixtures");
    let corpus = load_corpus(fixtures.join("prompt_docs.jsonl")).map_err(|e| e.to_string())?;
    let targets = [("fx-single", 1), ("fx-multi", 2), ("fx-structured", 4)];
    for (id, target) in targets {
        let doc = corpus.document(id).ok_or(format!("fixture `{id}` missing"))?;
        let demo = render_demonstration(doc, &corpus.label_set).map_err(|e| e.to_string())?;
        let query = render_query(doc, target, &corpus.label_set).map_err(|e| e.to_string())?;
        let want_demo = std::fs::read(fixtures.join(format!("golden/{id}.demo.txt"))).unwrap();
        let want_query = std::fs::read(fixtures.join(format!("golden/{id}.query.txt"))).unwrap();
        check(demo.as_bytes() == want_demo, format!("{id}: demonstration differs from golden bytes"))?;
        check(query.as_bytes() == want_query, format!("{id}: query differs from golden bytes"))?;
    }

    // A demonstration too long for a 1200-token budget is removed; the query stays.
    let long = Document::new(
        "long",
        SourceKind::Unstructured,
        (0..60).map(|k| {
            (
                format!("Sentence {k} reports yet another secondary outcome of the randomized trial in detail."),
                LabelVector::one_hot(6, 3),
            )
        }),
    );
    let query_doc = corpus.document("fx-multi").unwrap();
    for (name, tok) in [
        ("whitespace", &WhitespaceTokenizer as &dyn TokenCounter),
        ("byte", &ByteTokenizer as &dyn TokenCounter),
    ] {
        let p = assemble_prompt(&[&long], query_doc, 2, &corpus.label_set, 1200, tok).map_err(|e| e.to_string())?;
        let query = render_query(query_doc, 2, &corpus.label_set).unwrap();
        check(
            p.n_shots == 0 && p.truncated && p.text == query,
            format!("{name} tokenizer: demonstration not dropped at budget 1200"),
        )?;
    }
    Ok("3 fixture documents byte-identical; demonstration dropped at budget 1200".into())
}

// ---------------------------------------------------------------------------

fn desk_config(lambda: f64) -> TrainConfig {
    TrainConfig {
        n_tokens: 2,
        lambda,
        bank_capacity: 128,
        epochs: 5,
        // Desk-scale learning rate; the library default targets a pretrained backbone.
        lr: 2e-3,
        ..TrainConfig::default()
    }
}

fn desk_run(train: &Corpus, dev: &Corpus, test: &Corpus, lambda: f64) -> Result<(f64, Duration), String> {
    let start = Instant::now();
    let config = desk_config(lambda);
    let mut model = ToyTransformer::new(ToyConfig::default()).map_err(|e| e.to_string())?;
    model.attach_adapters(7);
    let emb = HashedBagOfWords::default();
    let out = run_training(&mut model, train, dev, &emb, &config, &mut |_| Ok(())).map_err(|e| e.to_string())?;
    let report =
        evaluate_trained(&model, &out.head, &out.profile, train, test, &emb, &config).map_err(|e| e.to_string())?;
    Ok((report.micro_f1, start.elapsed()))
}

fn end_to_end_training() -> Outcome {
    let corpus = generate(&SyntheticConfig::default());
    let (train, dev, test) = stratified_split(&corpus, (0.6, 0.2, 0.2), 42).map_err(|e| e.to_string())?;
    let (full, t_full) = desk_run(&train, &dev, &test, 0.1)?;
    let (no_con, t_no_con) = desk_run(&train, &dev, &test, 0.0)?;
    let summary = format!(
        "micro F1 {full:.4} (lambda 0.1, {:.0}s), {no_con:.4} (lambda 0, {:.0}s)",
        t_full.as_secs_f64(),
        t_no_con.as_secs_f64()
    );
    check(full >= 0.90, format!("held-out micro F1 below 0.90: {summary}"))?;
    check(t_full <= Duration::from_secs(300), format!("run exceeded 5 minutes: {summary}"))?;
    check(full >= no_con - 0.02, format!("ablation regression: {summary}"))?;
    Ok(summary)
}

// ---------------------------------------------------------------------------

fn frozen_backbone() -> Outcome {
    let corpus = generate(&SyntheticConfig {
        n_docs: 30,
        ..SyntheticConfig::default()
    });
    let (train, dev, _) = stratified_split(&corpus, (0.6, 0.2, 0.2), 1).map_err(|e| e.to_string())?;
    let mut model = ToyTransformer::new(ToyConfig::default()).map_err(|e| e.to_string())?;
    model.attach_adapters(7);
    let backbone = model.backbone_snapshot();
    let adapters = model.adapter_parameters().to_vec();
    let config = TrainConfig {
        epochs: 1,
        max_steps: Some(10),
        lr: 2e-3,
        ..TrainConfig::default()
    };
    let emb = HashedBagOfWords::default();
    let mut steps = 0;
    let out = run_training(&mut model, &train, &dev, &emb, &config, &mut |_| {
        steps += 1;
        Ok(())
    })
    .map_err(|e| e.to_string())?;
    check(steps == 10, format!("{steps} steps ran"))?;
    let after = model.backbone_snapshot();
    let bitwise = backbone.len() == after.len() && backbone.iter().zip(&after).all(|(a, b)| a.to_bits() == b.to_bits());
    check(bitwise, "backbone parameters changed")?;
    check(out.adapters != adapters, "adapters did not change")?;
    let shape = out.head.shape();
    check(
        out.head != VerbalizerHead::new(shape, config.seed.wrapping_add(1)).unwrap(),
        "head did not change",
    )?;
    check(out.net != WeightingNet::zeros(shape.m), "weighting net did not change")?;
    Ok(format!("{} backbone parameters bitwise unchanged after 10 steps", backbone.len()))
}

// ---------------------------------------------------------------------------

fn icl_identity() -> Outcome {
    let corpus = generate(&SyntheticConfig {
        n_docs: 60,
        ..SyntheticConfig::default()
    });
    let (train, _, test) = stratified_split(&corpus, (0.6, 0.2, 0.2), 3).map_err(|e| e.to_string())?;
    let backend = GoldEchoBackend::from_corpus(&test).map_err(|e| e.to_string())?;
    let emb = HashedBagOfWords::default();
    let mut out = Vec::new();
    for shots in [0, 1, 5, 10] {
        let config = IclConfig {
            shots,
            ..IclConfig::default()
        };
        let report = run_icl(&test, &train, &backend as &dyn LanguageModel, &emb, &config, &mut |_| Ok(()))
            .map_err(|e| e.to_string())?;
        check(
            report.micro_f1 == 1.0 && report.n_parse_failures == 0,
            format!("{shots}-shot: micro {} with {} parse failures", report.micro_f1, report.n_parse_failures),
        )?;
        out.push(format!("{shots}"));
    }
    Ok(format!("micro F1 1.0, 0 parse failures at shots {}", out.join("/")))
}

// ---------------------------------------------------------------------------

/// Label counts of the released dataset.
const DATASET_LABEL_COUNTS: [(&str, usize); 6] = [
    ("BACKGROUND", 1252),
    ("OBJECTIVE", 827),
    ("METHODS", 2319),
    ("RESULTS", 2757),
    ("CONCLUSIONS", 1114),
    ("OTHER", 112),
];

fn dataset_check() -> Option<Outcome> {
    let path = std::env::var_os("SSCLAB_BIORC800")
        .map(PathBuf::from)
        .unwrap_or_else(|| manifest_dir().join("../../data/biorc800.jsonl"));
    if !path.exists() {
        return None;
    }
    Some((|| {
        let corpus = load_corpus(&path).map_err(|e| e.to_string())?;
        let s = corpus_stats(&corpus);
        check(s.n_docs == 800, format!("{} docs", s.n_docs))?;
        check(s.n_sentences == 7911, format!("{} sentences", s.n_sentences))?;
        check(s.n_multilabel_sentences == 452, format!("{} multi-label sentences", s.n_multilabel_sentences))?;
        for (label, count) in DATASET_LABEL_COUNTS {
            let got = s.label_counts.iter().find(|l| l.label == label).map(|l| l.count);
            check(got == Some(count), format!("{label}: {got:?} vs {count}"))?;
        }
        let (tr, dv, te) = stratified_split(&corpus, (0.6, 0.2, 0.2), 42).map_err(|e| e.to_string())?;
        let sizes = (tr.documents.len(), dv.documents.len(), te.documents.len());
        check(sizes == (480, 160, 160), format!("split sizes {sizes:?}"))?;
        Ok(format!("{}: statistics and 480/160/160 split match", path.display()))
    })())
}

// ---------------------------------------------------------------------------

fn run(name: &str, f: impl FnOnce() -> Option<Outcome>) -> Option<bool> {
    let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
        let msg = p
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_default();
        Some(Err(format!("panicked: {msg}")))
    });
    match outcome {
        None => {
            println!("[SKIP] {name}: dataset file not present");
            None
        }
        Some(Ok(detail)) => {
            println!("[PASS] {name}: {detail}");
            Some(true)
        }
        Some(Err(detail)) => {
            println!("[FAIL] {name}: {detail}");
            Some(false)
        }
    }
}

fn main() {
    // `cargo test -- --list` and similar harness queries have nothing to list.
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let results = [
        run("weighcon oracle equivalence", || Some(weighcon_oracle_equivalence())),
        run("gradient checks", || Some(gradient_checks())),
        run("scale/permutation invariance", || Some(invariance_suite())),
        run("metric oracles", || Some(metric_oracles())),
        run("prompt golden files", || Some(prompt_golden_files())),
        run("end-to-end desk-scale training", || Some(end_to_end_training())),
        run("frozen backbone", || Some(frozen_backbone())),
        run("icl pipeline identity", || Some(icl_identity())),
        run("dataset statistics", dataset_check),
    ];
    let failed = results.iter().filter(|r| **r == Some(false)).count();
    let passed = results.iter().filter(|r| **r == Some(true)).count();
    let skipped = results.iter().filter(|r| r.is_none()).count();
    println!("acceptance: {passed} passed, {failed} failed, {skipped} skipped");
    if failed > 0 {
        std::process::exit(1);
    }
}
