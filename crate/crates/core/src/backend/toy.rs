//! A small seeded causal transformer for CPU-scale experiments.
//!
//! Pre-norm blocks with ALiBi attention biases (no position embeddings),
//! ReLU feed-forward layers, a final layer norm, and an untied output
//! projection. Hidden states handed to callers are taken after the final layer
//! norm. Adapters are additive rank-`r` deltas `A . B` on the query, key,
//! value and output projections of every layer; `B` starts at zero so an
//! attached adapter initially leaves the model unchanged.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::linalg::{gemm, View, ViewMut};
use super::{ByteTokenizer, GenerationResult, LanguageModel, ParameterGroup, Tokenizer, TrainableModel};
use crate::error::{Error, Result};

const LN_EPS: f32 = 1e-5;
/// Query, key, value and output projections.
const N_PROJ: usize = 4;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ToyConfig {
    pub vocab_size: usize,
    pub d_model: usize,
    pub n_heads: usize,
    pub n_layers: usize,
    pub d_ff: usize,
    /// Each position attends to at most this many positions (itself included).
    pub attention_window: usize,
    pub adapter_rank: usize,
    pub context_limit: usize,
    pub seed: u64,
}

impl Default for ToyConfig {
    fn default() -> Self {
        Self {
            vocab_size: 258,
            d_model: 64,
            n_heads: 2,
            n_layers: 2,
            d_ff: 256,
            attention_window: 128,
            adapter_rank: 4,
            context_limit: 4096,
            seed: 1234,
        }
    }
}

impl ToyConfig {
    fn validate(&self) -> Result<()> {
        if self.d_model == 0 || self.n_heads == 0 || self.d_model % self.n_heads != 0 {
            return Err(Error::InvalidArgument(format!(
                "d_model {} must be a positive multiple of n_heads {}",
                self.d_model, self.n_heads
            )));
        }
        if self.vocab_size == 0
            || self.n_layers == 0
            || self.d_ff == 0
            || self.context_limit == 0
            || self.attention_window == 0
        {
            return Err(Error::InvalidArgument("toy config has a zero dimension".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
struct Layer {
    ln1_g: Vec<f32>,
    ln1_b: Vec<f32>,
    /// q, k, v, o; each `d x d`, applied as `x . W`.
    proj: [Vec<f32>; N_PROJ],
    ln2_g: Vec<f32>,
    ln2_b: Vec<f32>,
    ff1_w: Vec<f32>,
    ff1_b: Vec<f32>,
    ff2_w: Vec<f32>,
    ff2_b: Vec<f32>,
}

#[derive(Clone, Debug)]
struct Backbone {
    embed: Vec<f32>,
    layers: Vec<Layer>,
    lnf_g: Vec<f32>,
    lnf_b: Vec<f32>,
    unembed: Vec<f32>,
    unembed_b: Vec<f32>,
    slopes: Vec<f32>,
}

impl Backbone {
    fn init(cfg: &ToyConfig) -> Self {
        let (d, f, v) = (cfg.d_model, cfg.d_ff, cfg.vocab_size);
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut uniform = |n: usize, fan_in: usize| -> Vec<f32> {
            // Unit-variance-preserving uniform init.
            let bound = (3.0 / fan_in as f32).sqrt();
            (0..n).map(|_| rng.random_range(-bound..bound)).collect()
        };
        let embed = uniform(v * d, 1);
        let layers = (0..cfg.n_layers)
            .map(|_| Layer {
                ln1_g: vec![1.0; d],
                ln1_b: vec![0.0; d],
                proj: [
                    uniform(d * d, d),
                    uniform(d * d, d),
                    uniform(d * d, d),
                    uniform(d * d, d),
                ],
                ln2_g: vec![1.0; d],
                ln2_b: vec![0.0; d],
                ff1_w: uniform(d * f, d),
                ff1_b: vec![0.0; f],
                ff2_w: uniform(f * d, f),
                ff2_b: vec![0.0; d],
            })
            .collect();
        let unembed = uniform(d * v, d);
        // Geometric ALiBi slopes 2^(-8(h+1)/H).
        let h = cfg.n_heads as f32;
        let slopes = (0..cfg.n_heads)
            .map(|i| 2f32.powf(-8.0 * (i as f32 + 1.0) / h))
            .collect();
        Self {
            embed,
            layers,
            lnf_g: vec![1.0; d],
            lnf_b: vec![0.0; d],
            unembed,
            unembed_b: vec![0.0; v],
            slopes,
        }
    }

    fn tensors(&self) -> Vec<&[f32]> {
        let mut out: Vec<&[f32]> = vec![&self.embed];
        for l in &self.layers {
            out.extend([&l.ln1_g[..], &l.ln1_b[..]]);
            out.extend(l.proj.iter().map(|p| &p[..]));
            out.extend([
                &l.ln2_g[..],
                &l.ln2_b[..],
                &l.ff1_w[..],
                &l.ff1_b[..],
                &l.ff2_w[..],
                &l.ff2_b[..],
            ]);
        }
        out.extend([&self.lnf_g[..], &self.lnf_b[..], &self.unembed[..], &self.unembed_b[..]]);
        out
    }
}

/// Cached activations of one block, kept for the backward pass.
struct LayerCache {
    x: Vec<f32>,
    a: Vec<f32>,
    ln1: Vec<(f32, f32)>,
    q: Vec<f32>,
    k: Vec<f32>,
    v: Vec<f32>,
    /// Attention probabilities, per head, laid out by [`attention_blocks`].
    probs: Vec<f32>,
    o: Vec<f32>,
    xm: Vec<f32>,
    ln2: Vec<(f32, f32)>,
    u: Vec<f32>,
    hid: Vec<f32>,
    w: [Vec<f32>; N_PROJ],
    t: usize,
    q_start: usize,
}

/// Activations of one traced generation.
pub struct ToyTrace {
    layers: Vec<LayerCache>,
    final_x: Vec<f32>,
    lnf: Vec<(f32, f32)>,
    n: usize,
}

pub struct ToyTransformer {
    config: ToyConfig,
    backbone: Backbone,
    adapters: Vec<f32>,
    tokenizer: ByteTokenizer,
}

fn layer_norm(x: &[f32], rows: usize, d: usize, g: &[f32], b: &[f32]) -> (Vec<f32>, Vec<(f32, f32)>) {
    let mut out = vec![0.0; rows * d];
    let mut stats = Vec::with_capacity(rows);
    for r in 0..rows {
        let row = &x[r * d..(r + 1) * d];
        let mean = row.iter().sum::<f32>() / d as f32;
        let var = row.iter().map(|v| (v - mean) * (v - mean)).sum::<f32>() / d as f32;
        let rstd = 1.0 / (var + LN_EPS).sqrt();
        for j in 0..d {
            out[r * d + j] = g[j] * (row[j] - mean) * rstd + b[j];
        }
        stats.push((mean, rstd));
    }
    (out, stats)
}

fn layer_norm_backward(dy: &[f32], x: &[f32], stats: &[(f32, f32)], g: &[f32], d: usize) -> Vec<f32> {
    let mut dx = vec![0.0; dy.len()];
    let mut dxhat = vec![0.0; d];
    for (r, &(mean, rstd)) in stats.iter().enumerate() {
        let xr = &x[r * d..(r + 1) * d];
        let dyr = &dy[r * d..(r + 1) * d];
        let mut sum_d = 0.0;
        let mut sum_dx = 0.0;
        for j in 0..d {
            dxhat[j] = dyr[j] * g[j];
            sum_d += dxhat[j];
            sum_dx += dxhat[j] * (xr[j] - mean) * rstd;
        }
        let (md, mdx) = (sum_d / d as f32, sum_dx / d as f32);
        for j in 0..d {
            let xhat = (xr[j] - mean) * rstd;
            dx[r * d + j] = rstd * (dxhat[j] - md - xhat * mdx);
        }
    }
    dx
}

/// Query rows processed together in attention.
const QUERY_BLOCK: usize = 64;

/// A block of query rows `i0..i0 + rows` (relative to the first active
/// position) with the key range `k0..k0 + kl` covering all their windows.
/// Its probabilities start at `off` within one head's buffer.
struct AttnBlock {
    i0: usize,
    rows: usize,
    k0: usize,
    kl: usize,
    off: usize,
}

fn attention_blocks(t: usize, q_start: usize, window: usize) -> (Vec<AttnBlock>, usize) {
    let mut blocks = Vec::new();
    let mut off = 0;
    for i0 in (0..t - q_start).step_by(QUERY_BLOCK) {
        let rows = QUERY_BLOCK.min(t - q_start - i0);
        let first = q_start + i0;
        let k0 = first.saturating_sub(window - 1);
        let kl = first + rows - k0;
        blocks.push(AttnBlock { i0, rows, k0, kl, off });
        off += rows * kl;
    }
    (blocks, off)
}

fn add_bias(x: &mut [f32], bias: &[f32]) {
    for row in x.chunks_mut(bias.len()) {
        row.iter_mut().zip(bias).for_each(|(v, b)| *v += b);
    }
}

fn argmax(values: &[f32]) -> u32 {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best as u32
}

impl ToyTransformer {
    pub fn new(config: ToyConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            backbone: Backbone::init(&config),
            config,
            adapters: Vec::new(),
            tokenizer: ByteTokenizer,
        })
    }

    pub fn config(&self) -> &ToyConfig {
        &self.config
    }

    fn adapter_block(&self) -> usize {
        2 * self.config.d_model * self.config.adapter_rank
    }

    pub fn adapter_len(&self) -> usize {
        self.config.n_layers * N_PROJ * self.adapter_block()
    }

    pub fn has_adapters(&self) -> bool {
        !self.adapters.is_empty()
    }

    /// Attaches rank-`r` adapters: `A` uniform in `+-1/sqrt(d)`, `B = 0`.
    pub fn attach_adapters(&mut self, seed: u64) {
        let (d, r) = (self.config.d_model, self.config.adapter_rank);
        let bound = 1.0 / (d as f32).sqrt();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut adapters = vec![0.0; self.adapter_len()];
        for block in adapters.chunks_mut(self.adapter_block()) {
            for v in &mut block[..d * r] {
                *v = rng.random_range(-bound..bound);
            }
        }
        self.adapters = adapters;
    }

    pub fn backbone_parameter_count(&self) -> usize {
        self.backbone.tensors().iter().map(|t| t.len()).sum()
    }

    pub fn total_parameter_count(&self) -> usize {
        self.backbone_parameter_count() + self.adapters.len()
    }

    /// Effective projections `W + A . B` of layer `l`.
    fn effective(&self, l: usize) -> [Vec<f32>; N_PROJ] {
        let (d, r) = (self.config.d_model, self.config.adapter_rank);
        let layer = &self.backbone.layers[l];
        std::array::from_fn(|p| {
            let mut w = layer.proj[p].clone();
            if self.has_adapters() {
                let off = (l * N_PROJ + p) * self.adapter_block();
                let a = &self.adapters[off..off + d * r];
                let b = &self.adapters[off + d * r..off + 2 * d * r];
                gemm(1.0, View::new(a, d, r), View::new(b, r, d), 1.0, ViewMut::new(&mut w, d, d));
            }
            w
        })
    }

    fn layer_forward(
        &self,
        l: usize,
        x: Vec<f32>,
        t: usize,
        q_start: usize,
        keep: bool,
    ) -> (Vec<f32>, Option<LayerCache>) {
        let cfg = &self.config;
        let (d, nh, f) = (cfg.d_model, cfg.n_heads, cfg.d_ff);
        let dh = d / nh;
        let tq = t - q_start;
        let layer = &self.backbone.layers[l];
        let w = self.effective(l);

        let (a, ln1) = layer_norm(&x, t, d, &layer.ln1_g, &layer.ln1_b);
        let a_view = View::new(&a, t, d);
        let mut q = vec![0.0; tq * d];
        gemm(1.0, a_view.rows(q_start, tq), View::new(&w[0], d, d), 0.0, ViewMut::new(&mut q, tq, d));
        let mut k = vec![0.0; t * d];
        gemm(1.0, a_view, View::new(&w[1], d, d), 0.0, ViewMut::new(&mut k, t, d));
        let mut v = vec![0.0; t * d];
        gemm(1.0, a_view, View::new(&w[2], d, d), 0.0, ViewMut::new(&mut v, t, d));

        let scale = 1.0 / (dh as f32).sqrt();
        let (blocks, block_len) = attention_blocks(t, q_start, cfg.attention_window);
        let mut probs = vec![0.0; nh * block_len];
        let mut o = vec![0.0; tq * d];
        for h in 0..nh {
            let slope = self.backbone.slopes[h];
            for blk in &blocks {
                let p_b = &mut probs[h * block_len + blk.off..h * block_len + blk.off + blk.rows * blk.kl];
                gemm(
                    scale,
                    View::new(&q, tq, d).rows(blk.i0, blk.rows).cols(h * dh, dh),
                    View::new(&k, t, d).rows(blk.k0, blk.kl).cols(h * dh, dh).t(),
                    0.0,
                    ViewMut::new(p_b, blk.rows, blk.kl),
                );
                for r in 0..blk.rows {
                    let pos = q_start + blk.i0 + r;
                    let lo = pos.saturating_sub(cfg.attention_window - 1) - blk.k0;
                    let hi = pos - blk.k0;
                    let row = &mut p_b[r * blk.kl..(r + 1) * blk.kl];
                    let mut max = f32::NEG_INFINITY;
                    for (j, s) in row[lo..=hi].iter_mut().enumerate() {
                        *s -= slope * (hi - lo - j) as f32;
                        max = max.max(*s);
                    }
                    let mut sum = 0.0;
                    for s in &mut row[lo..=hi] {
                        *s = (*s - max).exp();
                        sum += *s;
                    }
                    let inv = 1.0 / sum;
                    row[lo..=hi].iter_mut().for_each(|s| *s *= inv);
                    row[..lo].iter_mut().for_each(|s| *s = 0.0);
                    row[hi + 1..].iter_mut().for_each(|s| *s = 0.0);
                }
                gemm(
                    1.0,
                    View::new(p_b, blk.rows, blk.kl),
                    View::new(&v, t, d).rows(blk.k0, blk.kl).cols(h * dh, dh),
                    0.0,
                    ViewMut::strided(&mut o[blk.i0 * d..], blk.rows, dh, d, h * dh),
                );
            }
        }

        let mut xm = x[q_start * d..].to_vec();
        gemm(1.0, View::new(&o, tq, d), View::new(&w[3], d, d), 1.0, ViewMut::new(&mut xm, tq, d));

        let (a2, ln2) = layer_norm(&xm, tq, d, &layer.ln2_g, &layer.ln2_b);
        let mut u = vec![0.0; tq * f];
        gemm(1.0, View::new(&a2, tq, d), View::new(&layer.ff1_w, d, f), 0.0, ViewMut::new(&mut u, tq, f));
        add_bias(&mut u, &layer.ff1_b);
        let hid: Vec<f32> = u.iter().map(|&z| z.max(0.0)).collect();
        let mut out = xm.clone();
        gemm(1.0, View::new(&hid, tq, f), View::new(&layer.ff2_w, f, d), 1.0, ViewMut::new(&mut out, tq, d));
        add_bias(&mut out, &layer.ff2_b);

        let cache = keep.then(|| LayerCache {
            x,
            a,
            ln1,
            q,
            k,
            v,
            probs,
            o,
            xm,
            ln2,
            u,
            hid,
            w,
            t,
            q_start,
        });
        (out, cache)
    }

    /// Runs the stack over `ids`, producing final states and logits for the
    /// last `n_active` positions.
    fn forward(&self, ids: &[u32], n_active: usize, keep: bool) -> (Vec<f32>, Vec<f32>, Option<ToyTrace>) {
        let cfg = &self.config;
        let (d, v) = (cfg.d_model, cfg.vocab_size);
        let t = ids.len();
        let mut x = Vec::with_capacity(t * d);
        for &id in ids {
            let id = id as usize;
            x.extend_from_slice(&self.backbone.embed[id * d..(id + 1) * d]);
        }
        let mut caches = Vec::new();
        for l in 0..cfg.n_layers {
            let q_start = if l + 1 == cfg.n_layers { t - n_active } else { 0 };
            let (out, cache) = self.layer_forward(l, x, t, q_start, keep);
            x = out;
            caches.extend(cache);
        }
        let (hidden, lnf) = layer_norm(&x, n_active, d, &self.backbone.lnf_g, &self.backbone.lnf_b);
        let mut logits = vec![0.0; n_active * v];
        gemm(
            1.0,
            View::new(&hidden, n_active, d),
            View::new(&self.backbone.unembed, d, v),
            0.0,
            ViewMut::new(&mut logits, n_active, v),
        );
        add_bias(&mut logits, &self.backbone.unembed_b);
        let trace = keep.then(|| ToyTrace {
            layers: caches,
            final_x: x,
            lnf,
            n: n_active,
        });
        (hidden, logits, trace)
    }

    /// Greedy decoding of `n` tokens from raw token ids.
    pub fn generate_ids(
        &self,
        ids: &[u32],
        n: usize,
        keep: bool,
    ) -> Result<(Vec<u32>, Vec<Vec<f32>>, Option<ToyTrace>)> {
        let cfg = &self.config;
        if n == 0 {
            return Err(Error::InvalidArgument("must generate at least one token".into()));
        }
        if ids.is_empty() {
            return Err(Error::InvalidArgument("empty prompt".into()));
        }
        if let Some(&bad) = ids.iter().find(|&&id| id as usize >= cfg.vocab_size) {
            return Err(Error::InvalidArgument(format!("token id {bad} outside vocabulary")));
        }
        let len = ids.len() + n - 1;
        if len > cfg.context_limit {
            return Err(Error::ContextOverflow {
                len,
                limit: cfg.context_limit,
            });
        }
        let mut seq = ids.to_vec();
        for _ in 1..n {
            let (_, logits, _) = self.forward(&seq, 1, false);
            seq.push(argmax(&logits));
        }
        let (hidden, logits, trace) = self.forward(&seq, n, keep);
        let v = cfg.vocab_size;
        let mut tokens = seq[ids.len()..].to_vec();
        tokens.push(argmax(&logits[(n - 1) * v..]));
        if hidden.iter().any(|h| !h.is_finite()) {
            return Err(Error::NonFinite("hidden states".into()));
        }
        let d = cfg.d_model;
        let hidden_states = hidden.chunks(d).map(<[f32]>::to_vec).collect();
        Ok((tokens, hidden_states, trace))
    }

    fn layer_backward(
        &self,
        l: usize,
        c: &LayerCache,
        d_out: &[f32],
        need_dx: bool,
    ) -> (Option<Vec<f32>>, [Vec<f32>; N_PROJ]) {
        let cfg = &self.config;
        let (d, nh, f) = (cfg.d_model, cfg.n_heads, cfg.d_ff);
        let dh = d / nh;
        let (t, q_start) = (c.t, c.q_start);
        let tq = t - q_start;
        let layer = &self.backbone.layers[l];

        // Feed-forward branch.
        let mut d_u = vec![0.0; tq * f];
        gemm(1.0, View::new(d_out, tq, d), View::new(&layer.ff2_w, f, d).t(), 0.0, ViewMut::new(&mut d_u, tq, f));
        for (g, &z) in d_u.iter_mut().zip(&c.u) {
            if z <= 0.0 {
                *g = 0.0;
            }
        }
        let _ = &c.hid;
        let mut d_a2 = vec![0.0; tq * d];
        gemm(1.0, View::new(&d_u, tq, f), View::new(&layer.ff1_w, d, f).t(), 0.0, ViewMut::new(&mut d_a2, tq, d));
        let mut d_xm = layer_norm_backward(&d_a2, &c.xm, &c.ln2, &layer.ln2_g, d);
        d_xm.iter_mut().zip(d_out).for_each(|(g, o)| *g += o);

        // Output projection.
        let mut dw: [Vec<f32>; N_PROJ] = std::array::from_fn(|_| vec![0.0; d * d]);
        gemm(1.0, View::new(&c.o, tq, d).t(), View::new(&d_xm, tq, d), 0.0, ViewMut::new(&mut dw[3], d, d));
        let mut d_o = vec![0.0; tq * d];
        gemm(1.0, View::new(&d_xm, tq, d), View::new(&c.w[3], d, d).t(), 0.0, ViewMut::new(&mut d_o, tq, d));

        // Attention.
        let scale = 1.0 / (dh as f32).sqrt();
        let mut d_q = vec![0.0; tq * d];
        let mut d_k = vec![0.0; t * d];
        let mut d_v = vec![0.0; t * d];
        let (blocks, block_len) = attention_blocks(t, q_start, cfg.attention_window);
        let mut d_s = Vec::new();
        for h in 0..nh {
            for blk in &blocks {
                let p_b = &c.probs[h * block_len + blk.off..h * block_len + blk.off + blk.rows * blk.kl];
                let d_o_b = View::new(&d_o, tq, d).rows(blk.i0, blk.rows).cols(h * dh, dh);
                d_s.clear();
                d_s.resize(blk.rows * blk.kl, 0.0);
                gemm(
                    1.0,
                    d_o_b,
                    View::new(&c.v, t, d).rows(blk.k0, blk.kl).cols(h * dh, dh).t(),
                    0.0,
                    ViewMut::new(&mut d_s, blk.rows, blk.kl),
                );
                gemm(
                    1.0,
                    View::new(p_b, blk.rows, blk.kl).t(),
                    d_o_b,
                    1.0,
                    ViewMut::strided(&mut d_v[blk.k0 * d..], blk.kl, dh, d, h * dh),
                );
                for r in 0..blk.rows {
                    let p = &p_b[r * blk.kl..(r + 1) * blk.kl];
                    let g = &mut d_s[r * blk.kl..(r + 1) * blk.kl];
                    let dot: f32 = p.iter().zip(g.iter()).map(|(a, b)| a * b).sum();
                    for (gj, &pj) in g.iter_mut().zip(p) {
                        *gj = pj * (*gj - dot) * scale;
                    }
                }
                gemm(
                    1.0,
                    View::new(&d_s, blk.rows, blk.kl),
                    View::new(&c.k, t, d).rows(blk.k0, blk.kl).cols(h * dh, dh),
                    0.0,
                    ViewMut::strided(&mut d_q[blk.i0 * d..], blk.rows, dh, d, h * dh),
                );
                gemm(
                    1.0,
                    View::new(&d_s, blk.rows, blk.kl).t(),
                    View::new(&c.q, tq, d).rows(blk.i0, blk.rows).cols(h * dh, dh),
                    1.0,
                    ViewMut::strided(&mut d_k[blk.k0 * d..], blk.kl, dh, d, h * dh),
                );
            }
        }

        let a_view = View::new(&c.a, t, d);
        gemm(1.0, a_view.rows(q_start, tq).t(), View::new(&d_q, tq, d), 0.0, ViewMut::new(&mut dw[0], d, d));
        gemm(1.0, a_view.t(), View::new(&d_k, t, d), 0.0, ViewMut::new(&mut dw[1], d, d));
        gemm(1.0, a_view.t(), View::new(&d_v, t, d), 0.0, ViewMut::new(&mut dw[2], d, d));

        if !need_dx {
            return (None, dw);
        }
        let mut d_a = vec![0.0; t * d];
        gemm(1.0, View::new(&d_k, t, d), View::new(&c.w[1], d, d).t(), 0.0, ViewMut::new(&mut d_a, t, d));
        gemm(1.0, View::new(&d_v, t, d), View::new(&c.w[2], d, d).t(), 1.0, ViewMut::new(&mut d_a, t, d));
        gemm(
            1.0,
            View::new(&d_q, tq, d),
            View::new(&c.w[0], d, d).t(),
            1.0,
            ViewMut::new(&mut d_a[q_start * d..], tq, d),
        );
        let mut d_x = layer_norm_backward(&d_a, &c.x, &c.ln1, &layer.ln1_g, d);
        d_x[q_start * d..].iter_mut().zip(&d_xm).for_each(|(g, v)| *g += v);
        (Some(d_x), dw)
    }

    #[cfg(test)]
    fn backbone_mut(&mut self) -> &mut Backbone {
        &mut self.backbone
    }
}

impl LanguageModel for ToyTransformer {
    fn name(&self) -> &str {
        "toy"
    }

    fn d_model(&self) -> usize {
        self.config.d_model
    }

    fn tokenizer(&self) -> &dyn Tokenizer {
        &self.tokenizer
    }

    fn context_limit(&self) -> usize {
        self.config.context_limit
    }

    fn generate(&self, prompt: &str, n: usize) -> Result<GenerationResult> {
        self.generate_traced_inner(prompt, n, false).map(|(g, _)| g)
    }

    fn parameter_groups(&self) -> Vec<ParameterGroup> {
        vec![
            ParameterGroup {
                name: "backbone".into(),
                count: self.backbone_parameter_count(),
                frozen: true,
            },
            ParameterGroup {
                name: "adapters".into(),
                count: self.adapters.len(),
                frozen: false,
            },
        ]
    }
}

impl ToyTransformer {
    fn generate_traced_inner(
        &self,
        prompt: &str,
        n: usize,
        keep: bool,
    ) -> Result<(GenerationResult, Option<ToyTrace>)> {
        if self.config.vocab_size != self.tokenizer.vocab_size() {
            return Err(Error::InvalidArgument(format!(
                "text generation needs a {}-token vocabulary",
                self.tokenizer.vocab_size()
            )));
        }
        let ids = self.tokenizer.encode(prompt);
        let (token_ids, hidden_states, trace) = self.generate_ids(&ids, n, keep)?;
        let decoded = self.tokenizer.decode(&token_ids);
        Ok((
            GenerationResult {
                token_ids,
                hidden_states,
                decoded,
            },
            trace,
        ))
    }
}

impl TrainableModel for ToyTransformer {
    type Trace = ToyTrace;

    fn generate_traced(&self, prompt: &str, n: usize) -> Result<(GenerationResult, ToyTrace)> {
        let (g, trace) = self.generate_traced_inner(prompt, n, true)?;
        Ok((g, trace.expect("trace requested")))
    }

    fn adapter_gradient(&self, trace: &ToyTrace, d_hidden: &[Vec<f32>]) -> Result<Vec<f32>> {
        let (d, r) = (self.config.d_model, self.config.adapter_rank);
        if !self.has_adapters() {
            return Err(Error::InvalidArgument("no adapters attached".into()));
        }
        if d_hidden.len() != trace.n || d_hidden.iter().any(|g| g.len() != d) {
            return Err(Error::Shape(format!(
                "expected {} hidden gradients of width {d}",
                trace.n
            )));
        }
        let dy: Vec<f32> = d_hidden.concat();
        let mut d_x = layer_norm_backward(&dy, &trace.final_x, &trace.lnf, &self.backbone.lnf_g, d);
        let mut grad = vec![0.0; self.adapters.len()];
        for l in (0..self.config.n_layers).rev() {
            let (dx, dw) = self.layer_backward(l, &trace.layers[l], &d_x, l > 0);
            for (p, dw_p) in dw.iter().enumerate() {
                let off = (l * N_PROJ + p) * self.adapter_block();
                let a = &self.adapters[off..off + d * r];
                let b = &self.adapters[off + d * r..off + 2 * d * r];
                let (ga, gb) = grad[off..off + 2 * d * r].split_at_mut(d * r);
                // W = W0 + A.B  =>  dA = dW . B^T,  dB = A^T . dW
                gemm(1.0, View::new(dw_p, d, d), View::new(b, r, d).t(), 0.0, ViewMut::new(ga, d, r));
                gemm(1.0, View::new(a, d, r).t(), View::new(dw_p, d, d), 0.0, ViewMut::new(gb, r, d));
            }
            if let Some(dx) = dx {
                d_x = dx;
            }
        }
        if grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::NonFinite("adapter gradient".into()));
        }
        Ok(grad)
    }

    fn adapter_parameters(&self) -> &[f32] {
        &self.adapters
    }

    fn adapter_parameters_mut(&mut self) -> &mut [f32] {
        &mut self.adapters
    }

    fn backbone_snapshot(&self) -> Vec<f32> {
        self.backbone.tensors().concat()
    }
}
