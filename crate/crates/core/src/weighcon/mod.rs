//! Auto-weighting multi-label contrastive loss.
//!
//! For anchors `i` in the batch and classes `c`:
//!
//! ```text
//! l_con = - sum_c mean_{i: P_i(c) != {}} mean_{j in P_i(c)} a_ij s_ij / sum_{k != i} (1 - a_ik) s_ik
//! ```
//!
//! with `s = exp(cos)`, pair weights `a_ij = sigmoid(Wa [y_i; y_j] + ba)`, and
//! positives `P_i(c) = { j != i : y_i(c) = y_j(c) = 1 }` drawn from the batch
//! plus the memory bank. There is no logarithm around the ratio. Bank entries
//! are never anchors and receive no gradient.

mod bank;

use serde::{Deserialize, Serialize};

pub use bank::{BankEntry, MemoryBank};

use crate::corpus::LabelVector;
use crate::error::{Error, Result};
use crate::verbalizer::sigmoid;

/// One-layer map `[y_i; y_j] -> sigmoid(w . [y_i; y_j] + b)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightingNet {
    pub w: Vec<f64>,
    pub b: f64,
}

impl WeightingNet {
    pub fn zeros(m: usize) -> Self {
        Self {
            w: vec![0.0; 2 * m],
            b: 0.0,
        }
    }

    pub fn m(&self) -> usize {
        self.w.len() / 2
    }

    pub fn n_params(&self) -> usize {
        self.w.len() + 1
    }

    /// `[w..., b]`.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut v = self.w.clone();
        v.push(self.b);
        v
    }

    pub fn from_flat(flat: &[f64]) -> Result<Self> {
        if flat.is_empty() || flat.len() % 2 == 0 {
            return Err(Error::Shape(format!("{} weighting parameters", flat.len())));
        }
        let (w, b) = flat.split_at(flat.len() - 1);
        Ok(Self { w: w.to_vec(), b: b[0] })
    }

    fn logit(&self, y_i: &LabelVector, y_j: &LabelVector) -> f64 {
        let m = self.m();
        let mut z = self.b;
        for c in y_i.indices() {
            z += self.w[c];
        }
        for c in y_j.indices() {
            z += self.w[m + c];
        }
        z
    }

    pub fn pair_weight(&self, y_i: &LabelVector, y_j: &LabelVector) -> Result<f64> {
        let m = self.m();
        if y_i.len() != m || y_j.len() != m {
            return Err(Error::Shape(format!(
                "label vectors of length {} and {} for m = {m}",
                y_i.len(),
                y_j.len()
            )));
        }
        Ok(sigmoid(self.logit(y_i, y_j)))
    }
}

/// Pool members `j != i` sharing class `c` with member `i`.
pub fn positives(i: usize, c: usize, pool: &[&LabelVector]) -> Vec<usize> {
    if !pool[i].get(c) {
        return Vec::new();
    }
    (0..pool.len()).filter(|&j| j != i && pool[j].get(c)).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct WeighConOutput {
    pub l_con: f64,
    /// Total size of all positive sets, `sum_(i,c) |P_i(c)|`.
    pub n_positive_pairs: usize,
    /// `(i, c)` terms skipped for an empty positive set.
    pub n_skipped_terms: usize,
    /// Gradient with respect to each batch representation.
    pub d_h: Vec<Vec<f64>>,
    /// Gradient with respect to the weighting net, `[w..., b]`.
    pub d_net: Vec<f64>,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Loss value and gradients for batch representations `h` with labels `y`.
pub fn weighcon_loss(h: &[Vec<f64>], y: &[LabelVector], bank: &[BankEntry], net: &WeightingNet) -> Result<WeighConOutput> {
    let nb = h.len();
    let m = net.m();
    if nb == 0 {
        return Err(Error::InvalidArgument("empty batch".into()));
    }
    if y.len() != nb {
        return Err(Error::Shape(format!("{nb} representations for {} labels", y.len())));
    }
    let dim = h[0].len();
    let pool_h: Vec<&[f64]> = h.iter().map(Vec::as_slice).chain(bank.iter().map(|e| e.h.as_slice())).collect();
    let pool_y: Vec<&LabelVector> = y.iter().chain(bank.iter().map(|e| &e.y)).collect();
    if pool_h.iter().any(|v| v.len() != dim) || pool_y.iter().any(|v| v.len() != m) {
        return Err(Error::Shape("inconsistent representation or label width".into()));
    }
    let norms: Vec<f64> = pool_h.iter().map(|v| norm(v)).collect();
    if norms.iter().any(|&n| n == 0.0 || !n.is_finite()) {
        return Err(Error::ZeroVector);
    }
    let np = pool_h.len();

    // Per-class anchor counts and positive sets.
    let mut n_positive_pairs = 0;
    let mut n_skipped_terms = 0;
    let mut pos: Vec<Vec<Vec<usize>>> = Vec::with_capacity(m);
    let mut n_anchor = vec![0usize; m];
    for c in 0..m {
        let sets: Vec<Vec<usize>> = (0..nb).map(|i| positives(i, c, &pool_y)).collect();
        for set in &sets {
            if set.is_empty() {
                n_skipped_terms += 1;
            } else {
                n_anchor[c] += 1;
                n_positive_pairs += set.len();
            }
        }
        pos.push(sets);
    }

    let mut d_h = vec![vec![0.0; dim]; nb];
    let mut d_net = vec![0.0; net.n_params()];
    let mut l_con = 0.0;
    let mut w = vec![0.0; np];
    for i in 0..nb {
        // Combined positive weights w_ij = sum_c 1[j in P_i(c)] / (N_c |P_i(c)|).
        w.iter_mut().for_each(|v| *v = 0.0);
        let mut any = false;
        for c in 0..m {
            let set = &pos[c][i];
            if set.is_empty() {
                continue;
            }
            any = true;
            let share = 1.0 / (n_anchor[c] as f64 * set.len() as f64);
            for &j in set {
                w[j] += share;
            }
        }
        if !any {
            continue;
        }
        let mut cos = vec![0.0; np];
        let mut s = vec![0.0; np];
        let mut alpha = vec![0.0; np];
        let mut denom = 0.0;
        let mut numer = 0.0;
        for k in (0..np).filter(|&k| k != i) {
            cos[k] = (dot(pool_h[i], pool_h[k]) / (norms[i] * norms[k])).clamp(-1.0, 1.0);
            s[k] = cos[k].exp();
            alpha[k] = sigmoid(net.logit(pool_y[i], pool_y[k]));
            denom += (1.0 - alpha[k]) * s[k];
            numer += w[k] * alpha[k] * s[k];
        }
        l_con -= numer / denom;

        let inv_d = 1.0 / denom;
        let r = numer * inv_d * inv_d;
        for k in (0..np).filter(|&k| k != i) {
            let g_s = -w[k] * alpha[k] * inv_d + r * (1.0 - alpha[k]);
            let g_a = -w[k] * s[k] * inv_d - r * s[k];
            let g_cos = g_s * s[k];
            let inv_ik = 1.0 / (norms[i] * norms[k]);
            // d cos / d h_i = h_k / (|h_i||h_k|) - cos h_i / |h_i|^2
            let ci = cos[k] / (norms[i] * norms[i]);
            for t in 0..dim {
                d_h[i][t] += g_cos * (pool_h[k][t] * inv_ik - ci * pool_h[i][t]);
            }
            if k < nb {
                let ck = cos[k] / (norms[k] * norms[k]);
                for t in 0..dim {
                    d_h[k][t] += g_cos * (pool_h[i][t] * inv_ik - ck * pool_h[k][t]);
                }
            }
            let g_z = g_a * alpha[k] * (1.0 - alpha[k]);
            for c in pool_y[i].indices() {
                d_net[c] += g_z;
            }
            for c in pool_y[k].indices() {
                d_net[m + c] += g_z;
            }
            d_net[2 * m] += g_z;
        }
    }
    Ok(WeighConOutput {
        l_con,
        n_positive_pairs,
        n_skipped_terms,
        d_h,
        d_net,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossBreakdown {
    pub l_ce: f64,
    pub l_con: f64,
    pub l_total: f64,
    pub lambda: f64,
    pub n_positive_pairs: usize,
    pub n_skipped_terms: usize,
}

/// `l_total = l_ce + lambda * l_con`.
pub fn combined_loss(l_ce: f64, l_con: f64, lambda: f64) -> Result<LossBreakdown> {
    if !(lambda >= 0.0) {
        return Err(Error::InvalidArgument(format!("lambda must be >= 0, got {lambda}")));
    }
    Ok(LossBreakdown {
        l_ce,
        l_con,
        l_total: l_ce + lambda * l_con,
        lambda,
        n_positive_pairs: 0,
        n_skipped_terms: 0,
    })
}

/// One line of per-step loss telemetry.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepTelemetry {
    pub step: u64,
    pub l_ce: f64,
    pub l_con: f64,
    pub l_total: f64,
    pub n_positive_pairs: usize,
    pub n_skipped_terms: usize,
    pub bank_size: usize,
}
