//! Self-contained window scorer: hashed token features, a context window of
//! mean-pooled embeddings, one tanh hidden layer and an independent sigmoid
//! per label.
//!
//! Parameter layout in the flat vector:
//!
//! | block      | shape                          | group   |
//! |------------|--------------------------------|---------|
//! | embeddings | `buckets x embed_dim`          | encoder |
//! | hidden W   | `(2w+1)*embed_dim x hidden`    | encoder |
//! | hidden b   | `hidden`                       | encoder |
//! | head W     | `hidden x labels`              | head    |
//! | head b     | `labels`                       | head    |

use std::ops::Range;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::features::{hashed_features, BOS, EOS};
use super::{Matrix, ParamGroup, ParamGroupKind, TokenScorer};
use crate::data::Sentence;
use crate::error::{Error, Result};

/// Outputs are kept this far away from 0 and 1.
pub const PROB_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScorerConfig {
    pub buckets: usize,
    pub embed_dim: usize,
    pub window: usize,
    pub hidden: usize,
    pub dropout: f64,
    pub init_scale: f64,
    pub seed: u64,
}

impl Default for ScorerConfig {
    fn default() -> Self {
        ScorerConfig {
            buckets: 4096,
            embed_dim: 32,
            window: 2,
            hidden: 64,
            dropout: 0.1,
            init_scale: 0.05,
            seed: 0,
        }
    }
}

impl ScorerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.buckets == 0 || self.embed_dim == 0 || self.hidden == 0 {
            return Err(Error::invalid("scorer config", "sizes must be positive"));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::invalid("dropout", format!("{} not in [0, 1)", self.dropout)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
struct Layout {
    w1: usize,
    b1: usize,
    w2: usize,
    b2: usize,
    total: usize,
    input: usize,
}

impl Layout {
    fn new(cfg: &ScorerConfig, labels: usize) -> Self {
        let input = (2 * cfg.window + 1) * cfg.embed_dim;
        // Embeddings start at offset 0.
        let w1 = cfg.buckets * cfg.embed_dim;
        let b1 = w1 + input * cfg.hidden;
        let w2 = b1 + cfg.hidden;
        let b2 = w2 + cfg.hidden * labels;
        Layout {
            w1,
            b1,
            w2,
            b2,
            total: b2 + labels,
            input,
        }
    }
}

/// Feature ids of a sentence, with padding positions on both sides.
#[derive(Debug, Clone)]
pub struct EncodedSentence {
    /// Feature buckets per padded position (`window` pads on each side).
    positions: Vec<Vec<u32>>,
    len: usize,
}

impl EncodedSentence {
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }
}

/// Intermediate values kept for the backward pass.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    inputs: Matrix,
    hidden: Matrix,
    mask: Option<Matrix>,
    probs: Matrix,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceScorer {
    config: ScorerConfig,
    num_labels: usize,
    layout_total: usize,
    params: Vec<f64>,
}

impl ReferenceScorer {
    /// Uniform `±init_scale` weights everywhere except the two biases, which
    /// start at zero.
    pub fn new(config: ScorerConfig, num_labels: usize) -> Result<Self> {
        config.validate()?;
        if num_labels == 0 {
            return Err(Error::invalid("scorer", "no labels"));
        }
        let layout = Layout::new(&config, num_labels);
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let s = config.init_scale;
        let mut params = vec![0.0; layout.total];
        for (i, p) in params.iter_mut().enumerate() {
            let is_bias = (layout.b1..layout.w2).contains(&i) || i >= layout.b2;
            if !is_bias && s > 0.0 {
                *p = rng.random_range(-s..s);
            }
        }
        Ok(ReferenceScorer {
            config,
            num_labels,
            layout_total: layout.total,
            params,
        })
    }

    /// Restores a scorer from a flat parameter vector.
    pub fn from_params(config: ScorerConfig, num_labels: usize, params: Vec<f64>) -> Result<Self> {
        config.validate()?;
        let layout = Layout::new(&config, num_labels);
        if params.len() != layout.total {
            return Err(Error::invalid(
                "parameters",
                format!("expected {} values, got {}", layout.total, params.len()),
            ));
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::invalid("parameters", "non-finite value"));
        }
        Ok(ReferenceScorer {
            config,
            num_labels,
            layout_total: layout.total,
            params,
        })
    }

    pub fn config(&self) -> &ScorerConfig {
        &self.config
    }

    fn layout(&self) -> Layout {
        Layout::new(&self.config, self.num_labels)
    }

    /// Sets the output layer to zero, so every probability is exactly 0.5.
    pub fn zero_head(&mut self) {
        let l = self.layout();
        self.params[l.w2..].fill(0.0);
    }

    fn embed_position(&self, feats: &[u32], out: &mut [f64]) {
        let d = self.config.embed_dim;
        out.fill(0.0);
        let scale = 1.0 / feats.len() as f64;
        for &f in feats {
            let row = &self.params[f as usize * d..(f as usize + 1) * d];
            for (o, &e) in out.iter_mut().zip(row) {
                *o += e * scale;
            }
        }
    }
}

fn sigmoid(z: f64) -> f64 {
    let p = if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    };
    p.clamp(PROB_FLOOR, 1.0 - PROB_FLOOR)
}

impl TokenScorer for ReferenceScorer {
    type Input = EncodedSentence;
    type Cache = ForwardCache;

    fn num_labels(&self) -> usize {
        self.num_labels
    }

    fn params(&self) -> &[f64] {
        &self.params
    }

    fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    fn param_groups(&self) -> Vec<ParamGroup> {
        let l = self.layout();
        debug_assert_eq!(l.total, self.layout_total);
        vec![
            ParamGroup {
                kind: ParamGroupKind::Encoder,
                range: 0..l.w2,
            },
            ParamGroup {
                kind: ParamGroupKind::Head,
                range: l.w2..l.total,
            },
        ]
    }

    fn encode(&self, sentence: &Sentence) -> EncodedSentence {
        let w = self.config.window;
        let b = self.config.buckets;
        let mut positions = Vec::with_capacity(sentence.len() + 2 * w);
        let bos = hashed_features(BOS, b);
        let eos = hashed_features(EOS, b);
        positions.extend(std::iter::repeat_n(bos, w));
        positions.extend(sentence.tokens.iter().map(|t| hashed_features(t, b)));
        positions.extend(std::iter::repeat_n(eos, w));
        EncodedSentence {
            positions,
            len: sentence.len(),
        }
    }

    fn forward_with(&self, input: &EncodedSentence, dropout: Option<&mut dyn RngCore>) -> (Matrix, ForwardCache) {
        let cfg = &self.config;
        let l = self.layout();
        let (d, h, nl, n) = (cfg.embed_dim, cfg.hidden, self.num_labels, input.len);
        let span = 2 * cfg.window + 1;

        let mut pooled = Matrix::zeros(input.positions.len(), d);
        for (p, feats) in input.positions.iter().enumerate() {
            self.embed_position(feats, pooled.row_mut(p));
        }
        let mut inputs = Matrix::zeros(n, l.input);
        for i in 0..n {
            let row = inputs.row_mut(i);
            for o in 0..span {
                row[o * d..(o + 1) * d].copy_from_slice(pooled.row(i + o));
            }
        }

        let w1 = &self.params[l.w1..l.b1];
        let b1 = &self.params[l.b1..l.w2];
        let mut hidden = Matrix::zeros(n, h);
        for i in 0..n {
            let x = inputs.row(i);
            let out = hidden.row_mut(i);
            out.copy_from_slice(b1);
            for (k, &xk) in x.iter().enumerate() {
                if xk == 0.0 {
                    continue;
                }
                let wrow = &w1[k * h..(k + 1) * h];
                for (o, &wv) in out.iter_mut().zip(wrow) {
                    *o += xk * wv;
                }
            }
            for v in out.iter_mut() {
                *v = v.tanh();
            }
        }

        let mask = match dropout {
            Some(rng) if cfg.dropout > 0.0 => {
                let keep = 1.0 - cfg.dropout;
                let mut m = Matrix::zeros(n, h);
                for v in m.as_mut_slice() {
                    *v = if rng.random::<f64>() < keep { 1.0 / keep } else { 0.0 };
                }
                Some(m)
            }
            _ => None,
        };

        let w2 = &self.params[l.w2..l.b2];
        let b2 = &self.params[l.b2..l.total];
        let mut probs = Matrix::zeros(n, nl);
        for i in 0..n {
            let out = probs.row_mut(i);
            out.copy_from_slice(b2);
            for j in 0..h {
                let a = hidden[(i, j)] * mask.as_ref().map_or(1.0, |m| m[(i, j)]);
                if a == 0.0 {
                    continue;
                }
                for (o, &wv) in out.iter_mut().zip(&w2[j * nl..(j + 1) * nl]) {
                    *o += a * wv;
                }
            }
            for v in out.iter_mut() {
                *v = sigmoid(*v);
            }
        }
        let cache = ForwardCache {
            inputs,
            hidden,
            mask,
            probs: probs.clone(),
        };
        (probs, cache)
    }

    fn cached_probs<'a>(&self, cache: &'a ForwardCache) -> &'a Matrix {
        &cache.probs
    }

    fn backward_logits(
        &self,
        input: &EncodedSentence,
        cache: &ForwardCache,
        grad_logits: &Matrix,
        grads: &mut [f64],
    ) -> Result<()> {
        let cfg = &self.config;
        let l = self.layout();
        let (d, h, nl, n) = (cfg.embed_dim, cfg.hidden, self.num_labels, input.len);
        if grad_logits.shape() != (n, nl) {
            return Err(Error::Shape {
                expected: (n, nl),
                actual: grad_logits.shape(),
            });
        }
        if grads.len() != l.total {
            return Err(Error::Shape {
                expected: (l.total, 1),
                actual: (grads.len(), 1),
            });
        }
        let span = 2 * cfg.window + 1;
        let w1 = &self.params[l.w1..l.b1];
        let w2 = &self.params[l.w2..l.b2];
        let (emb_g, rest) = grads.split_at_mut(l.w1);
        let (w1_g, rest) = rest.split_at_mut(l.b1 - l.w1);
        let (b1_g, rest) = rest.split_at_mut(l.w2 - l.b1);
        let (w2_g, b2_g) = rest.split_at_mut(l.b2 - l.w2);

        let mut d_act = vec![0.0; h];
        let mut d_pre = vec![0.0; h];
        let mut d_input = vec![0.0; l.input];
        for i in 0..n {
            let dz = grad_logits.row(i);
            if dz.iter().all(|&g| g == 0.0) {
                continue;
            }
            for (b, &g) in b2_g.iter_mut().zip(dz) {
                *b += g;
            }
            for j in 0..h {
                let m = cache.mask.as_ref().map_or(1.0, |m| m[(i, j)]);
                let a = cache.hidden[(i, j)];
                let wrow = &w2[j * nl..(j + 1) * nl];
                let grow = &mut w2_g[j * nl..(j + 1) * nl];
                let mut acc = 0.0;
                for ((gw, &wv), &g) in grow.iter_mut().zip(wrow).zip(dz) {
                    *gw += a * m * g;
                    acc += wv * g;
                }
                d_act[j] = acc * m;
                d_pre[j] = d_act[j] * (1.0 - a * a);
            }
            for (b, &g) in b1_g.iter_mut().zip(&d_pre) {
                *b += g;
            }
            let x = cache.inputs.row(i);
            for k in 0..l.input {
                let wrow = &w1[k * h..(k + 1) * h];
                let grow = &mut w1_g[k * h..(k + 1) * h];
                let xk = x[k];
                let mut acc = 0.0;
                for ((gw, &wv), &g) in grow.iter_mut().zip(wrow).zip(&d_pre) {
                    *gw += xk * g;
                    acc += wv * g;
                }
                d_input[k] = acc;
            }
            for o in 0..span {
                let feats = &input.positions[i + o];
                let scale = 1.0 / feats.len() as f64;
                let block = &d_input[o * d..(o + 1) * d];
                for &f in feats {
                    let row = &mut emb_g[f as usize * d..(f as usize + 1) * d];
                    for (r, &g) in row.iter_mut().zip(block) {
                        *r += g * scale;
                    }
                }
            }
        }
        Ok(())
    }
}

/// Range of embedding-table rows touched by a bucket id.
pub fn embedding_rows(config: &ScorerConfig, bucket: u32) -> Range<usize> {
    let d = config.embed_dim;
    bucket as usize * d..(bucket as usize + 1) * d
}
