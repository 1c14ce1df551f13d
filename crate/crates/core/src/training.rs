//! Fine-tuning loop: seeded shuffles shared by every shift policy, Adam, the
//! per-position update census and best-checkpoint selection.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::encoding::{Attend, EncodedWindow, Vocab};
use crate::error::{Error, Result};
use crate::evaluation::{self, EvalSet};
use crate::model::{self, Gradients, ModelParams};
use crate::padshift::{apply_shift, ShiftPolicy};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            lr: 3e-5,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub adam: AdamConfig,
    /// Seeds the epoch shuffles; independent of the shift policy's own seed.
    pub seed: u64,
    pub shift: ShiftPolicy,
    /// Evaluate on the validation set every this many steps (0: only at the end).
    pub eval_every: usize,
    pub max_answer_len: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 2,
            batch_size: 16,
            adam: AdamConfig::default(),
            seed: 0,
            shift: ShiftPolicy::off(),
            eval_every: 1000,
            max_answer_len: 30,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let a = &self.adam;
        if self.epochs == 0 || self.batch_size == 0 || self.max_answer_len == 0 {
            return Err(Error::Config("epochs, batch size and max answer length must be positive".into()));
        }
        if !(a.lr > 0.0 && a.eps > 0.0 && (0.0..1.0).contains(&a.beta1) && (0.0..1.0).contains(&a.beta2)) {
            return Err(Error::Config(format!("invalid Adam settings {a:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub first: ModelParams,
    pub second: ModelParams,
    pub step: u64,
}

impl AdamState {
    pub fn new(params: &ModelParams) -> Self {
        AdamState {
            first: params.zeros_like(),
            second: params.zeros_like(),
            step: 0,
        }
    }
}

/// One bias-corrected Adam update. Rows with zero gradient keep decaying
/// their moments. Non-finite gradients abort before anything is modified.
pub fn adam_step(params: &mut ModelParams, grads: &Gradients, state: &mut AdamState, cfg: &AdamConfig) -> Result<()> {
    let names = model::tensor_shapes(&params.config);
    for (t, (name, _)) in grads.tensors().iter().zip(&names) {
        if let Some((index, &value)) = t.iter().enumerate().find(|(_, x)| !x.is_finite()) {
            return Err(Error::NonFiniteGradient {
                tensor: name.clone(),
                index,
                value,
            });
        }
    }
    state.step += 1;
    let c1 = 1.0 - cfg.beta1.powi(state.step as i32);
    let c2 = 1.0 - cfg.beta2.powi(state.step as i32);
    for (((p, g), m), v) in params
        .tensors_mut()
        .into_iter()
        .zip(grads.tensors())
        .zip(state.first.tensors_mut())
        .zip(state.second.tensors_mut())
    {
        for i in 0..p.len() {
            m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
            v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
            let m_hat = m[i] / c1;
            let v_hat = v[i] / c2;
            p[i] -= cfg.lr * m_hat / (v_hat.sqrt() + cfg.eps);
        }
    }
    Ok(())
}

/// How many optimizer steps each position embedding could be updated in.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UpdateCensus {
    pub counts: Vec<u64>,
    pub total_steps: u64,
}

impl UpdateCensus {
    pub fn new(capacity: usize) -> Self {
        UpdateCensus {
            counts: vec![0; capacity],
            total_steps: 0,
        }
    }

    /// Count one step: a position is updated if any window attends it.
    pub fn record<'a, I: IntoIterator<Item = &'a EncodedWindow>>(&mut self, windows: I) {
        let mut hit = vec![false; self.counts.len()];
        for w in windows {
            for (h, m) in hit.iter_mut().zip(&w.mask) {
                *h |= *m == Attend::Attend;
            }
        }
        for (c, h) in self.counts.iter_mut().zip(hit) {
            *c += h as u64;
        }
        self.total_steps += 1;
    }

    pub fn fractions(&self) -> Vec<f64> {
        self.counts
            .iter()
            .map(|&c| c as f64 / self.total_steps.max(1) as f64)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CensusRow {
    pub position: usize,
    pub count: u64,
    pub fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CensusReport {
    pub total_steps: u64,
    pub rows: Vec<CensusRow>,
    pub first: CensusRow,
    pub last: CensusRow,
}

pub fn census_report(c: &UpdateCensus) -> Result<CensusReport> {
    if c.total_steps == 0 || c.counts.is_empty() {
        return Err(Error::Invalid("census has no steps".into()));
    }
    let rows: Vec<CensusRow> = c
        .counts
        .iter()
        .zip(c.fractions())
        .enumerate()
        .map(|(position, (&count, fraction))| CensusRow {
            position,
            count,
            fraction,
        })
        .collect();
    Ok(CensusReport {
        total_steps: c.total_steps,
        first: rows[0].clone(),
        last: rows[rows.len() - 1].clone(),
        rows,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogRecord {
    pub step: u64,
    pub epoch: usize,
    /// Mean training loss since the previous record.
    pub train_loss: f64,
    pub val_f1: Option<f64>,
    pub val_em: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RunLog {
    pub records: Vec<LogRecord>,
    /// Step of the retained checkpoint (best validation F1, earliest on ties).
    pub best_step: Option<u64>,
    /// SHA-256 of the visiting order of window ids, per epoch.
    pub order_hashes: Vec<String>,
}

pub struct TrainOutcome {
    pub params: ModelParams,
    pub census: UpdateCensus,
    pub log: RunLog,
}

/// Visiting order of `windows` in `epoch`; depends on the seed only.
pub fn epoch_order(seed: u64, epoch: usize, len: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..len).collect();
    order.shuffle(&mut rng::stream(seed, "shuffle", "", epoch as u64));
    order
}

fn order_hash(windows: &[EncodedWindow], order: &[usize]) -> String {
    let mut buf = String::new();
    for &i in order {
        buf.push_str(&windows[i].uid());
        buf.push('\n');
    }
    rng::sha256_hex(buf.as_bytes())
}

/// The windows of one step after the shift policy is applied; windows without
/// a gold span are dropped.
fn shifted_batch(batch: &[usize], windows: &[EncodedWindow], policy: &ShiftPolicy, epoch: usize) -> Result<Vec<EncodedWindow>> {
    batch
        .iter()
        .map(|&i| &windows[i])
        .filter(|w| !w.gold_spans.is_empty())
        .map(|w| {
            let k = policy.shift_for(&w.uid(), epoch, w.layout.m, w.layout.n);
            apply_shift(w, k)
        })
        .collect()
}

/// Replay the layouts a training run would use, without touching a model.
pub fn simulate_census(cfg: &TrainConfig, windows: &[EncodedWindow], capacity: usize) -> Result<UpdateCensus> {
    cfg.validate()?;
    let mut census = UpdateCensus::new(capacity);
    for epoch in 0..cfg.epochs {
        let order = epoch_order(cfg.seed, epoch, windows.len());
        let mut steps = 0;
        for batch in order.chunks(cfg.batch_size) {
            let shifted = shifted_batch(batch, windows, &cfg.shift, epoch)?;
            if shifted.is_empty() {
                continue;
            }
            census.record(&shifted);
            steps += 1;
        }
        if steps == 0 {
            return Err(Error::AllSkipped(epoch));
        }
    }
    Ok(census)
}

/// Validation data for checkpoint selection.
pub struct Validation<'a> {
    pub set: &'a EvalSet,
    pub vocab: &'a Vocab,
}

pub fn train(cfg: &TrainConfig, init: ModelParams, windows: &[EncodedWindow], val: Option<Validation<'_>>) -> Result<TrainOutcome> {
    cfg.validate()?;
    if windows.is_empty() {
        return Err(Error::Invalid("no training windows".into()));
    }
    let capacity = init.config.capacity;
    let mut params = init;
    let mut adam = AdamState::new(&params);
    let mut census = UpdateCensus::new(capacity);
    let mut log = RunLog::default();
    let mut best: Option<(f64, ModelParams)> = None;
    let mut step: u64 = 0;
    let mut loss_sum = 0.0;
    let mut loss_steps = 0usize;

    let mut checkpoint = |params: &ModelParams, step: u64, epoch: usize, loss_sum: &mut f64, loss_steps: &mut usize, log: &mut RunLog| -> Result<()> {
        let mut rec = LogRecord {
            step,
            epoch,
            train_loss: *loss_sum / (*loss_steps).max(1) as f64,
            val_f1: None,
            val_em: None,
        };
        if let Some(v) = &val {
            let (_, report) = evaluation::evaluate(params, v.set, v.vocab, cfg.max_answer_len)?;
            rec.val_f1 = Some(report.f1);
            rec.val_em = Some(report.em);
            if best.as_ref().is_none_or(|(f1, _)| report.f1 > *f1) {
                best = Some((report.f1, params.clone()));
                log.best_step = Some(step);
            }
        }
        log.records.push(rec);
        *loss_sum = 0.0;
        *loss_steps = 0;
        Ok(())
    };

    for epoch in 0..cfg.epochs {
        let order = epoch_order(cfg.seed, epoch, windows.len());
        log.order_hashes.push(order_hash(windows, &order));
        let mut epoch_steps = 0;
        for batch in order.chunks(cfg.batch_size) {
            let shifted = shifted_batch(batch, windows, &cfg.shift, epoch)?;
            if shifted.is_empty() {
                continue;
            }
            let weight = 1.0 / shifted.len() as f64;
            let mut grads = params.zeros_like();
            let mut batch_loss = 0.0;
            for w in &shifted {
                batch_loss += weight * model::accumulate_gradients(&params, w, w.gold_spans[0], weight, &mut grads)?;
            }
            adam_step(&mut params, &grads, &mut adam, &cfg.adam)?;
            census.record(&shifted);
            step += 1;
            epoch_steps += 1;
            loss_sum += batch_loss;
            loss_steps += 1;
            if cfg.eval_every > 0 && step % cfg.eval_every as u64 == 0 {
                checkpoint(&params, step, epoch, &mut loss_sum, &mut loss_steps, &mut log)?;
            }
        }
        if epoch_steps == 0 {
            return Err(Error::AllSkipped(epoch));
        }
    }
    if log.records.last().is_none_or(|r| r.step != step) {
        checkpoint(&params, step, cfg.epochs - 1, &mut loss_sum, &mut loss_steps, &mut log)?;
    }
    drop(checkpoint);
    let params = match best {
        Some((_, p)) => p,
        None => params,
    };
    Ok(TrainOutcome { params, census, log })
}
