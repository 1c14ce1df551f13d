//! Run configuration: flat dotted keys under `model.*`, `train.*` and
//! `padshift.*`, read from TOML.
//!
//! ```toml
//! model.hidden = 64
//! train.lr = 3e-5
//! padshift.mode = "capped"
//! padshift.K = 64
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ModelConfig;
use crate::padshift::{Resample, ShiftMode, ShiftPolicy};
use crate::rng;
use crate::training::{AdamConfig, TrainConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSection {
    /// Vocabulary size including the four reserved tokens.
    pub vocab_size: usize,
    pub capacity: usize,
    pub hidden: usize,
    pub layers: usize,
    pub heads: usize,
    pub ff: usize,
    pub init_std: f64,
    /// Window stride in tokens; half the context room when absent.
    pub stride: Option<usize>,
}

impl Default for ModelSection {
    fn default() -> Self {
        ModelSection {
            vocab_size: 4096,
            capacity: 128,
            hidden: 64,
            layers: 2,
            heads: 2,
            ff: 256,
            init_std: 0.02,
            stride: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainSection {
    pub epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub seed: u64,
    pub eval_every: usize,
    pub max_answer_len: usize,
}

impl Default for TrainSection {
    fn default() -> Self {
        let t = TrainConfig::default();
        TrainSection {
            epochs: t.epochs,
            batch_size: t.batch_size,
            lr: t.adam.lr,
            beta1: t.adam.beta1,
            beta2: t.adam.beta2,
            eps: t.adam.eps,
            seed: t.seed,
            eval_every: t.eval_every,
            max_answer_len: t.max_answer_len,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PadshiftSection {
    /// `off`, `full`, `capped` (with `K`) or `capped:K`.
    pub mode: String,
    #[serde(rename = "K")]
    pub k: Option<usize>,
    pub seed: u64,
    pub resample: Resample,
}

impl Default for PadshiftSection {
    fn default() -> Self {
        PadshiftSection {
            mode: "off".into(),
            k: None,
            seed: 0,
            resample: Resample::Epoch,
        }
    }
}

impl PadshiftSection {
    pub fn shift_mode(&self) -> Result<ShiftMode> {
        match (self.mode.as_str(), self.k) {
            ("capped", Some(cap)) => Ok(ShiftMode::Capped { cap }),
            ("capped", None) => Err(Error::Config("padshift.mode = \"capped\" needs padshift.K".into())),
            (m, None) => m.parse().map_err(|e: Error| Error::Config(e.to_string())),
            (m, Some(_)) => Err(Error::Config(format!("padshift.K is only valid with mode \"capped\", not \"{m}\""))),
        }
    }

    pub fn policy(&self) -> Result<ShiftPolicy> {
        Ok(ShiftPolicy {
            mode: self.shift_mode()?,
            seed: self.seed,
            resample: self.resample,
        })
    }

    pub fn set_mode(&mut self, mode: ShiftMode) {
        match mode {
            ShiftMode::Capped { cap } => {
                self.mode = "capped".into();
                self.k = Some(cap);
            }
            other => {
                self.mode = other.to_string();
                self.k = None;
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub model: ModelSection,
    pub train: TrainSection,
    pub padshift: PadshiftSection,
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self> {
        let c: Config = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        self.model_config()?.validate()?;
        if self.model.capacity < 4 {
            return Err(Error::Config("model.capacity must be at least 4".into()));
        }
        if !(self.model.init_std > 0.0) {
            return Err(Error::Config("model.init_std must be positive".into()));
        }
        self.train_config()?.validate()
    }

    /// Use `seed` for shuffling, initialization and shift sampling alike.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.train.seed = seed;
        self.padshift.seed = seed;
        self
    }

    pub fn model_config(&self) -> Result<ModelConfig> {
        let m = &self.model;
        let c = ModelConfig {
            vocab_size: m.vocab_size,
            capacity: m.capacity,
            hidden: m.hidden,
            layers: m.layers,
            heads: m.heads,
            ff: m.ff,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn train_config(&self) -> Result<TrainConfig> {
        let t = &self.train;
        Ok(TrainConfig {
            epochs: t.epochs,
            batch_size: t.batch_size,
            adam: AdamConfig {
                lr: t.lr,
                beta1: t.beta1,
                beta2: t.beta2,
                eps: t.eps,
            },
            seed: t.seed,
            shift: self.padshift.policy()?,
            eval_every: t.eval_every,
            max_answer_len: t.max_answer_len,
        })
    }

    pub fn windowing(&self) -> crate::encoding::WindowingPolicy {
        use crate::encoding::WindowingPolicy;
        match self.model.stride {
            Some(s) => WindowingPolicy::with_stride(self.model.capacity, s),
            None => WindowingPolicy::new(self.model.capacity),
        }
    }

    /// SHA-256 of the canonical serialization.
    pub fn hash(&self) -> String {
        rng::sha256_hex(serde_json::to_string(self).expect("config serializes").as_bytes())
    }
}
