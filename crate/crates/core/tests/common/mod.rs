//! Independent reference implementations used by the integration tests.
//! Nothing here calls the library code it is compared against.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ssclab::corpus::LabelVector;
use ssclab::weighcon::{BankEntry, WeightingNet};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn cos(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    dot / (na * nb)
}

fn alpha(w: &[f64], b: f64, yi: &[bool], yj: &[bool]) -> f64 {
    let mut z = b;
    for (k, &on) in yi.iter().chain(yj).enumerate() {
        if on {
            z += w[k];
        }
    }
    1.0 / (1.0 + (-z).exp())
}

/// Term-by-term contrastive loss:
/// `-sum_c mean_i mean_{j in P_i(c)} a_ij s_ij / sum_{k != i} (1 - a_ik) s_ik`,
/// anchors from the batch, pool = batch then bank, empty `P_i(c)` skipped.
pub fn weighcon_oracle(h: &[Vec<f64>], y: &[Vec<bool>], bank_h: &[Vec<f64>], bank_y: &[Vec<bool>], w: &[f64], b: f64) -> f64 {
    let ph: Vec<&Vec<f64>> = h.iter().chain(bank_h).collect();
    let py: Vec<&Vec<bool>> = y.iter().chain(bank_y).collect();
    let m = y[0].len();
    let mut total = 0.0;
    for c in 0..m {
        let mut sum = 0.0;
        let mut anchors = 0;
        for i in 0..h.len() {
            if !py[i][c] {
                continue;
            }
            let mut denom = 0.0;
            for k in 0..ph.len() {
                if k != i {
                    denom += (1.0 - alpha(w, b, py[i], py[k])) * cos(ph[i], ph[k]).exp();
                }
            }
            let mut inner = 0.0;
            let mut count = 0;
            for j in 0..ph.len() {
                if j != i && py[j][c] {
                    inner += alpha(w, b, py[i], py[j]) * cos(ph[i], ph[j]).exp() / denom;
                    count += 1;
                }
            }
            if count > 0 {
                sum += inner / count as f64;
                anchors += 1;
            }
        }
        if anchors > 0 {
            total += sum / anchors as f64;
        }
    }
    -total
}

/// Random contrastive instance: representations, labels, bank and net.
pub struct ConInstance {
    pub h: Vec<Vec<f64>>,
    pub y: Vec<Vec<bool>>,
    pub bank_h: Vec<Vec<f64>>,
    pub bank_y: Vec<Vec<bool>>,
    pub w: Vec<f64>,
    pub b: f64,
}

impl ConInstance {
    pub fn random(rng: &mut ChaCha8Rng, max_batch: usize, max_bank: usize, max_m: usize, max_d: usize) -> Self {
        let nb = rng.random_range(1..=max_batch);
        let nk = rng.random_range(0..=max_bank);
        let m = rng.random_range(1..=max_m);
        let d = rng.random_range(1..=max_d);
        let vec = |rng: &mut ChaCha8Rng| -> Vec<f64> {
            loop {
                let v: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
                if v.iter().map(|x| x * x).sum::<f64>() > 1e-3 {
                    return v;
                }
            }
        };
        let labels = |rng: &mut ChaCha8Rng| -> Vec<bool> { (0..m).map(|_| rng.random_bool(0.5)).collect() };
        let h = (0..nb).map(|_| vec(rng)).collect();
        let y = (0..nb).map(|_| labels(rng)).collect();
        let bank_h = (0..nk).map(|_| vec(rng)).collect();
        let bank_y = (0..nk).map(|_| labels(rng)).collect();
        let w = (0..2 * m).map(|_| rng.random_range(-1.5..1.5)).collect();
        let b = rng.random_range(-1.0..1.0);
        Self { h, y, bank_h, bank_y, w, b }
    }

    pub fn labels(&self) -> Vec<LabelVector> {
        self.y.iter().map(|v| LabelVector::from_bits(v.clone())).collect()
    }

    pub fn bank(&self) -> Vec<BankEntry> {
        self.bank_h
            .iter()
            .zip(&self.bank_y)
            .enumerate()
            .map(|(s, (h, y))| BankEntry {
                h: h.clone(),
                y: LabelVector::from_bits(y.clone()),
                step: s as u64,
            })
            .collect()
    }

    pub fn net(&self) -> WeightingNet {
        WeightingNet {
            w: self.w.clone(),
            b: self.b,
        }
    }

    pub fn oracle(&self) -> f64 {
        weighcon_oracle(&self.h, &self.y, &self.bank_h, &self.bank_y, &self.w, self.b)
    }
}

/// Per-label (tp, fp, fn) by direct counting.
pub fn confusion(pred: &[Vec<bool>], gold: &[Vec<bool>], c: usize) -> (usize, usize, usize) {
    let tp = pred.iter().zip(gold).filter(|(p, g)| p[c] && g[c]).count();
    let fp = pred.iter().zip(gold).filter(|(p, g)| p[c] && !g[c]).count();
    let fn_ = pred.iter().zip(gold).filter(|(p, g)| !p[c] && g[c]).count();
    (tp, fp, fn_)
}

/// F1 as 2PR/(P+R), 0 when undefined.
pub fn f1_from(tp: usize, fp: usize, fn_: usize) -> f64 {
    let p = if tp + fp == 0 { 0.0 } else { tp as f64 / (tp + fp) as f64 };
    let r = if tp + fn_ == 0 { 0.0 } else { tp as f64 / (tp + fn_) as f64 };
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

/// (micro, macro) F1.
pub fn f1_oracle(pred: &[Vec<bool>], gold: &[Vec<bool>], m: usize) -> (f64, f64) {
    let (mut tp, mut fp, mut fn_) = (0, 0, 0);
    let mut macro_sum = 0.0;
    for c in 0..m {
        let (a, b, d) = confusion(pred, gold, c);
        tp += a;
        fp += b;
        fn_ += d;
        macro_sum += f1_from(a, b, d);
    }
    (f1_from(tp, fp, fn_), macro_sum / m as f64)
}

/// Exhaustive per-label threshold search over `k / 100` for k in 5, 10, ..., 95;
/// the first maximizer wins, labels without positives get 0.5.
pub fn thresholds_oracle(probs: &[Vec<f64>], gold: &[Vec<bool>], m: usize) -> Vec<f64> {
    let grid: Vec<f64> = (1..=19).map(|k| (5 * k) as f64 / 100.0).collect();
    (0..m)
        .map(|c| {
            if !gold.iter().any(|g| g[c]) {
                return 0.5;
            }
            // F1 as the exact fraction 2TP / (2TP + FP + FN), compared by
            // cross-multiplication so ties are decided without rounding.
            let mut best: Option<(usize, usize, f64)> = None;
            for &t in &grid {
                let pred: Vec<Vec<bool>> = probs.iter().map(|p| p.iter().map(|&v| v >= t).collect()).collect();
                let (tp, fp, fn_) = confusion(&pred, gold, c);
                let (num, den) = (2 * tp, (2 * tp + fp + fn_).max(1));
                let better = match best {
                    None => true,
                    Some((bn, bd, _)) => num * bd > bn * den,
                };
                if better {
                    best = Some((num, den, t));
                }
            }
            best.unwrap().2
        })
        .collect()
}

/// Cohen's kappa from two binary annotation sequences.
pub fn kappa_oracle(a: &[bool], b: &[bool]) -> f64 {
    let n = a.len() as f64;
    let agree = a.iter().zip(b).filter(|(x, y)| x == y).count() as f64;
    let pa = a.iter().filter(|&&x| x).count() as f64 / n;
    let pb = b.iter().filter(|&&x| x).count() as f64 / n;
    let p_o = agree / n;
    let p_e = pa * pb + (1.0 - pa) * (1.0 - pb);
    (p_o - p_e) / (1.0 - p_e)
}
