//! Verbalizer: concatenated generated-token states through a two-layer head.
//!
//! `e = [t_1; ...; t_n]`, `h = ReLU(W1 e + b1)`, `z = W2 h + b2`. Multi-label
//! corpora read `p = sigmoid(z)` with per-class binary cross-entropy;
//! single-label corpora use softmax cross-entropy on `z`. The hidden layer
//! `h` doubles as the contrastive representation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{LabelMode, LabelVector};
use crate::error::{Error, Result};

/// Clamp applied to probabilities inside the binary cross-entropy.
pub const PROB_EPS: f64 = 1e-7;

pub fn concat_hidden(states: &[Vec<f32>]) -> Result<Vec<f64>> {
    let first = states
        .first()
        .ok_or_else(|| Error::InvalidArgument("no hidden states".into()))?;
    let d = first.len();
    if let Some(bad) = states.iter().find(|s| s.len() != d) {
        return Err(Error::Shape(format!(
            "hidden state of width {} among width {d}",
            bad.len()
        )));
    }
    Ok(states.iter().flatten().map(|&v| v as f64).collect())
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

pub fn softmax(z: &[f64]) -> Vec<f64> {
    let max = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exp: Vec<f64> = z.iter().map(|v| (v - max).exp()).collect();
    let sum: f64 = exp.iter().sum();
    exp.into_iter().map(|v| v / sum).collect()
}

/// Label probabilities in the decoding convention of `mode`.
pub fn probabilities(z: &[f64], mode: LabelMode) -> Vec<f64> {
    match mode {
        LabelMode::Multi => z.iter().map(|&v| sigmoid(v)).collect(),
        LabelMode::Single => softmax(z),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeadShape {
    pub n: usize,
    pub d_model: usize,
    pub d_h: usize,
    pub m: usize,
}

impl HeadShape {
    pub fn input_dim(&self) -> usize {
        self.n * self.d_model
    }

    pub fn n_params(&self) -> usize {
        self.d_h * self.input_dim() + self.d_h + self.m * self.d_h + self.m
    }
}

/// Parameters stored flat as `[W1 (d_h x n.d_model), b1, W2 (m x d_h), b2]`,
/// row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct VerbalizerHead {
    shape: HeadShape,
    params: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HeadOutput {
    pub e: Vec<f64>,
    pub h: Vec<f64>,
    pub z: Vec<f64>,
    /// `sigmoid(z)`.
    pub p: Vec<f64>,
}

impl VerbalizerHead {
    pub fn zeros(shape: HeadShape) -> Result<Self> {
        if shape.n == 0 || shape.d_model == 0 || shape.d_h == 0 || shape.m == 0 {
            return Err(Error::InvalidArgument(format!("degenerate head shape {shape:?}")));
        }
        Ok(Self {
            params: vec![0.0; shape.n_params()],
            shape,
        })
    }

    /// Weights uniform in `+-1/sqrt(fan_in)`, biases zero.
    pub fn new(shape: HeadShape, seed: u64) -> Result<Self> {
        let mut head = Self::zeros(shape)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let b1 = (1.0 / shape.input_dim() as f64).sqrt();
        head.w1_mut().iter_mut().for_each(|w| *w = rng.random_range(-b1..b1));
        let b2 = (1.0 / shape.d_h as f64).sqrt();
        head.w2_mut().iter_mut().for_each(|w| *w = rng.random_range(-b2..b2));
        Ok(head)
    }

    pub fn from_params(shape: HeadShape, params: Vec<f64>) -> Result<Self> {
        if params.len() != shape.n_params() {
            return Err(Error::Shape(format!(
                "{} head parameters for shape {shape:?} (expected {})",
                params.len(),
                shape.n_params()
            )));
        }
        Ok(Self { shape, params })
    }

    pub fn shape(&self) -> HeadShape {
        self.shape
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    fn offsets(&self) -> [usize; 4] {
        let s = self.shape;
        let w1 = 0;
        let b1 = w1 + s.d_h * s.input_dim();
        let w2 = b1 + s.d_h;
        let b2 = w2 + s.m * s.d_h;
        [w1, b1, w2, b2]
    }

    pub fn w1(&self) -> &[f64] {
        let o = self.offsets();
        &self.params[o[0]..o[1]]
    }

    pub fn b1(&self) -> &[f64] {
        let o = self.offsets();
        &self.params[o[1]..o[2]]
    }

    pub fn w2(&self) -> &[f64] {
        let o = self.offsets();
        &self.params[o[2]..o[3]]
    }

    pub fn b2(&self) -> &[f64] {
        let o = self.offsets();
        &self.params[o[3]..]
    }

    pub fn w1_mut(&mut self) -> &mut [f64] {
        let o = self.offsets();
        &mut self.params[o[0]..o[1]]
    }

    pub fn b1_mut(&mut self) -> &mut [f64] {
        let o = self.offsets();
        &mut self.params[o[1]..o[2]]
    }

    pub fn w2_mut(&mut self) -> &mut [f64] {
        let o = self.offsets();
        &mut self.params[o[2]..o[3]]
    }

    pub fn b2_mut(&mut self) -> &mut [f64] {
        let o = self.offsets();
        &mut self.params[o[3]..]
    }

    pub fn forward(&self, e: &[f64]) -> Result<HeadOutput> {
        let s = self.shape;
        let nd = s.input_dim();
        if e.len() != nd {
            return Err(Error::Shape(format!("head input of length {} (expected {nd})", e.len())));
        }
        if e.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("head input".into()));
        }
        let (w1, b1, w2, b2) = (self.w1(), self.b1(), self.w2(), self.b2());
        let h: Vec<f64> = (0..s.d_h)
            .map(|r| {
                let row = &w1[r * nd..(r + 1) * nd];
                let a = b1[r] + row.iter().zip(e).map(|(w, x)| w * x).sum::<f64>();
                a.max(0.0)
            })
            .collect();
        let z: Vec<f64> = (0..s.m)
            .map(|c| {
                let row = &w2[c * s.d_h..(c + 1) * s.d_h];
                b2[c] + row.iter().zip(&h).map(|(w, x)| w * x).sum::<f64>()
            })
            .collect();
        let p = z.iter().map(|&v| sigmoid(v)).collect();
        Ok(HeadOutput {
            e: e.to_vec(),
            h,
            z,
            p,
        })
    }

    /// Back-propagates `d_z` (and an optional extra gradient arriving at `h`)
    /// through the head. Parameter gradients are added into `grad`; the
    /// gradient with respect to `e` is returned.
    pub fn backward(&self, out: &HeadOutput, d_z: &[f64], d_h_extra: Option<&[f64]>, grad: &mut [f64]) -> Vec<f64> {
        let s = self.shape;
        let nd = s.input_dim();
        let o = self.offsets();
        let w1 = self.w1();
        let w2 = self.w2();
        let mut d_h = d_h_extra.map_or_else(|| vec![0.0; s.d_h], <[f64]>::to_vec);
        for c in 0..s.m {
            grad[o[3] + c] += d_z[c];
            for r in 0..s.d_h {
                grad[o[2] + c * s.d_h + r] += d_z[c] * out.h[r];
                d_h[r] += d_z[c] * w2[c * s.d_h + r];
            }
        }
        let mut d_e = vec![0.0; nd];
        for r in 0..s.d_h {
            // ReLU gate: h > 0 exactly when the pre-activation was positive.
            if out.h[r] <= 0.0 || d_h[r] == 0.0 {
                continue;
            }
            let g = d_h[r];
            grad[o[1] + r] += g;
            let gw = &mut grad[o[0] + r * nd..o[0] + (r + 1) * nd];
            for (gw, x) in gw.iter_mut().zip(&out.e) {
                *gw += g * x;
            }
            for (de, w) in d_e.iter_mut().zip(&w1[r * nd..(r + 1) * nd]) {
                *de += g * w;
            }
        }
        d_e
    }
}

/// Classification loss on logits `z` and its gradient with respect to `z`.
///
/// Multi mode: mean over classes of binary cross-entropy on `sigmoid(z)`
/// clamped to `[PROB_EPS, 1 - PROB_EPS]` (clamped classes pass no gradient).
/// Single mode: categorical cross-entropy of `softmax(z)` against the gold
/// label's first index.
pub fn classification_loss(z: &[f64], gold: &LabelVector, mode: LabelMode) -> Result<(f64, Vec<f64>)> {
    let m = z.len();
    if gold.len() != m {
        return Err(Error::Shape(format!("{m} logits for {} labels", gold.len())));
    }
    match mode {
        LabelMode::Multi => {
            let mut loss = 0.0;
            let mut d_z = vec![0.0; m];
            for c in 0..m {
                let raw = sigmoid(z[c]);
                let p = raw.clamp(PROB_EPS, 1.0 - PROB_EPS);
                let y = if gold.get(c) { 1.0 } else { 0.0 };
                loss -= y * p.ln() + (1.0 - y) * (1.0 - p).ln();
                if p == raw {
                    d_z[c] = (p - y) / m as f64;
                }
            }
            Ok((loss / m as f64, d_z))
        }
        LabelMode::Single => {
            let target = gold
                .indices()
                .next()
                .ok_or_else(|| Error::InvalidArgument("empty gold label".into()))?;
            let mut d_z = softmax(z);
            let loss = -d_z[target].max(f64::MIN_POSITIVE).ln();
            d_z[target] -= 1.0;
            Ok((loss, d_z))
        }
    }
}
