use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub vocab_size: usize,
    /// Sequence capacity `n`.
    pub capacity: usize,
    pub hidden: usize,
    pub layers: usize,
    pub heads: usize,
    /// Feed-forward inner width.
    pub ff: usize,
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        if self.vocab_size == 0 || self.capacity == 0 || self.hidden == 0 || self.ff == 0 {
            return Err(Error::Config("model sizes must be positive".into()));
        }
        if self.heads == 0 || self.hidden % self.heads != 0 {
            return Err(Error::Config(format!(
                "hidden size {} not divisible by head count {}",
                self.hidden, self.heads
            )));
        }
        Ok(())
    }

    pub fn head_dim(&self) -> usize {
        self.hidden / self.heads
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerParams {
    pub ln1_gain: Vec<f64>,
    pub ln1_bias: Vec<f64>,
    pub wq: Vec<f64>,
    pub bq: Vec<f64>,
    pub wk: Vec<f64>,
    pub bk: Vec<f64>,
    pub wv: Vec<f64>,
    pub bv: Vec<f64>,
    pub wo: Vec<f64>,
    pub bo: Vec<f64>,
    pub ln2_gain: Vec<f64>,
    pub ln2_bias: Vec<f64>,
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: Vec<f64>,
}

/// All trainable tensors. Gradients and Adam moments reuse the same shape.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub config: ModelConfig,
    /// `vocab × H`
    pub token_embedding: Vec<f64>,
    /// `n × H`
    pub position_embedding: Vec<f64>,
    pub layers: Vec<LayerParams>,
    pub final_gain: Vec<f64>,
    pub final_bias: Vec<f64>,
    /// Start-boundary vector `S`.
    pub span_start: Vec<f64>,
    /// End-boundary vector `E`.
    pub span_end: Vec<f64>,
}

pub type Gradients = ModelParams;

/// Name and `(rows, cols)` of every tensor, in canonical order.
pub fn tensor_shapes(c: &ModelConfig) -> Vec<(String, (usize, usize))> {
    let h = c.hidden;
    let mut out = vec![
        ("token_embedding".to_string(), (c.vocab_size, h)),
        ("position_embedding".to_string(), (c.capacity, h)),
    ];
    for l in 0..c.layers {
        for (name, shape) in [
            ("ln1_gain", (1, h)),
            ("ln1_bias", (1, h)),
            ("wq", (h, h)),
            ("bq", (1, h)),
            ("wk", (h, h)),
            ("bk", (1, h)),
            ("wv", (h, h)),
            ("bv", (1, h)),
            ("wo", (h, h)),
            ("bo", (1, h)),
            ("ln2_gain", (1, h)),
            ("ln2_bias", (1, h)),
            ("w1", (h, c.ff)),
            ("b1", (1, c.ff)),
            ("w2", (c.ff, h)),
            ("b2", (1, h)),
        ] {
            out.push((format!("layers.{l}.{name}"), shape));
        }
    }
    for name in ["final_gain", "final_bias", "span_start", "span_end"] {
        out.push((name.to_string(), (1, h)));
    }
    out
}

impl LayerParams {
    fn tensors(&self) -> [&Vec<f64>; 16] {
        [
            &self.ln1_gain,
            &self.ln1_bias,
            &self.wq,
            &self.bq,
            &self.wk,
            &self.bk,
            &self.wv,
            &self.bv,
            &self.wo,
            &self.bo,
            &self.ln2_gain,
            &self.ln2_bias,
            &self.w1,
            &self.b1,
            &self.w2,
            &self.b2,
        ]
    }

    fn tensors_mut(&mut self) -> [&mut Vec<f64>; 16] {
        [
            &mut self.ln1_gain,
            &mut self.ln1_bias,
            &mut self.wq,
            &mut self.bq,
            &mut self.wk,
            &mut self.bk,
            &mut self.wv,
            &mut self.bv,
            &mut self.wo,
            &mut self.bo,
            &mut self.ln2_gain,
            &mut self.ln2_bias,
            &mut self.w1,
            &mut self.b1,
            &mut self.w2,
            &mut self.b2,
        ]
    }
}

impl ModelParams {
    /// All-zero tensors of the right shapes.
    pub fn zeros(config: ModelConfig) -> Self {
        let h = config.hidden;
        let z = |len: usize| vec![0.0; len];
        let layer = || LayerParams {
            ln1_gain: z(h),
            ln1_bias: z(h),
            wq: z(h * h),
            bq: z(h),
            wk: z(h * h),
            bk: z(h),
            wv: z(h * h),
            bv: z(h),
            wo: z(h * h),
            bo: z(h),
            ln2_gain: z(h),
            ln2_bias: z(h),
            w1: z(h * config.ff),
            b1: z(config.ff),
            w2: z(config.ff * h),
            b2: z(h),
        };
        ModelParams {
            config,
            token_embedding: z(config.vocab_size * h),
            position_embedding: z(config.capacity * h),
            layers: (0..config.layers).map(|_| layer()).collect(),
            final_gain: z(h),
            final_bias: z(h),
            span_start: z(h),
            span_end: z(h),
        }
    }

    pub fn zeros_like(&self) -> Self {
        Self::zeros(self.config)
    }

    /// Embeddings and weight matrices ~ N(0, `std`); layer-norm gains one,
    /// biases and span vectors zero.
    pub fn init(config: ModelConfig, std: f64, seed: u64) -> Result<Self> {
        config.validate()?;
        let mut p = Self::zeros(config);
        let normal = Normal::new(0.0, std).map_err(|e| Error::Config(e.to_string()))?;
        let fill = |name: &str, t: &mut Vec<f64>| {
            let mut s = rng::stream(seed, "init", name, 0);
            for x in t.iter_mut() {
                *x = normal.sample(&mut s);
            }
        };
        fill("token_embedding", &mut p.token_embedding);
        fill("position_embedding", &mut p.position_embedding);
        for (l, layer) in p.layers.iter_mut().enumerate() {
            layer.ln1_gain.fill(1.0);
            layer.ln2_gain.fill(1.0);
            fill(&format!("layers.{l}.wq"), &mut layer.wq);
            fill(&format!("layers.{l}.wk"), &mut layer.wk);
            fill(&format!("layers.{l}.wv"), &mut layer.wv);
            fill(&format!("layers.{l}.wo"), &mut layer.wo);
            fill(&format!("layers.{l}.w1"), &mut layer.w1);
            fill(&format!("layers.{l}.w2"), &mut layer.w2);
        }
        p.final_gain.fill(1.0);
        Ok(p)
    }

    /// Tensors in the canonical order of [`tensor_shapes`].
    pub fn tensors(&self) -> Vec<&Vec<f64>> {
        let mut out = vec![&self.token_embedding, &self.position_embedding];
        for l in &self.layers {
            out.extend(l.tensors());
        }
        out.extend([&self.final_gain, &self.final_bias, &self.span_start, &self.span_end]);
        out
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut Vec<f64>> {
        let mut out = vec![&mut self.token_embedding, &mut self.position_embedding];
        for l in &mut self.layers {
            out.extend(l.tensors_mut());
        }
        out.extend([
            &mut self.final_gain,
            &mut self.final_bias,
            &mut self.span_start,
            &mut self.span_end,
        ]);
        out
    }

    pub fn num_params(&self) -> usize {
        self.tensors().iter().map(|t| t.len()).sum()
    }

    /// `self += scale * other`, tensor by tensor.
    pub fn add_scaled(&mut self, other: &ModelParams, scale: f64) {
        for (a, b) in self.tensors_mut().into_iter().zip(other.tensors()) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += scale * y;
            }
        }
    }

    pub fn scale(&mut self, factor: f64) {
        for t in self.tensors_mut() {
            for x in t.iter_mut() {
                *x *= factor;
            }
        }
    }

    pub fn all_finite(&self) -> bool {
        self.tensors().iter().all(|t| t.iter().all(|x| x.is_finite()))
    }

    /// Row `p` of the position table.
    pub fn position_row(&self, p: usize) -> &[f64] {
        let h = self.config.hidden;
        &self.position_embedding[p * h..(p + 1) * h]
    }
}

/// Random perturbation helper for tests and benches.
pub fn randomize<R: Rng>(p: &mut ModelParams, scale: f64, rng: &mut R) {
    for t in p.tensors_mut() {
        for x in t.iter_mut() {
            *x += scale * (rng.random::<f64>() * 2.0 - 1.0);
        }
    }
}
