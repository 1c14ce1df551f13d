#![allow(dead_code)]

use rand::Rng;
use randpad_core::encoding::{Attend, EncodedWindow, PaddingLayout, CLS, PAD, SEP};
use randpad_core::model::{self, ModelConfig, ModelParams};

/// Random window `[CLS] q [SEP] c [SEP] [PAD]*` with ids drawn from `4..vocab`
/// and one gold span inside the context.
pub fn random_window<R: Rng>(rng: &mut R, n: usize, vocab: usize, max_q: usize, max_c: usize) -> EncodedWindow {
    let q = rng.random_range(1..=max_q);
    let c_cap = (n - q - 3).min(max_c);
    let c = rng.random_range(1..=c_cap);
    let mut ids = vec![CLS];
    ids.extend((0..q).map(|_| rng.random_range(4..vocab as u32)));
    ids.push(SEP);
    ids.extend((0..c).map(|_| rng.random_range(4..vocab as u32)));
    ids.push(SEP);
    let m = ids.len();
    ids.resize(n, PAD);
    let mask = (0..n).map(|i| if i < m { Attend::Attend } else { Attend::Ignore }).collect();
    let s = rng.random_range(0..c);
    let e = rng.random_range(s..c);
    EncodedWindow {
        example_id: format!("r{}", rng.random::<u32>()),
        index: 0,
        ids,
        mask,
        question_len: q,
        context_len: c,
        window_offset: 0,
        gold_spans: vec![(q + 2 + s, q + 2 + e)],
        layout: PaddingLayout { k: 0, m, n },
    }
}

pub fn config(vocab: usize, n: usize, hidden: usize, layers: usize, heads: usize, ff: usize) -> ModelConfig {
    ModelConfig { vocab_size: vocab, capacity: n, hidden, layers, heads, ff }
}

/// Parameters with every tensor perturbed so no gradient is trivially zero.
pub fn random_params(cfg: ModelConfig, seed: u64) -> ModelParams {
    let mut p = ModelParams::init(cfg, 0.3, seed).unwrap();
    let mut r = randpad_core::rng::stream(seed, "test-params", "", 0);
    model::randomize(&mut p, 0.2, &mut r);
    p
}
