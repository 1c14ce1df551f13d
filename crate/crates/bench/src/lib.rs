//! Fixtures shared by the benchmarks.

use randpad_core::encoding::{Attend, EncodedWindow, PaddingLayout, CLS, PAD, SEP};
use randpad_core::model::{ModelConfig, ModelParams};

pub fn config(capacity: usize, hidden: usize) -> ModelConfig {
    ModelConfig {
        vocab_size: 64,
        capacity,
        hidden,
        layers: 2,
        heads: 2,
        ff: 4 * hidden,
    }
}

pub fn params(cfg: ModelConfig) -> ModelParams {
    let mut p = ModelParams::init(cfg, 0.02, 1).expect("valid config");
    p.span_start.fill(0.01);
    p.span_end.fill(-0.01);
    p
}

/// `[CLS] q [SEP] c.. [SEP] [PAD]*` holding `m` non-pad tokens.
pub fn window(m: usize, n: usize) -> EncodedWindow {
    let c = m - 4;
    let mut ids = vec![CLS, 10, SEP];
    ids.extend((0..c as u32).map(|i| 4 + i % 60));
    ids.push(SEP);
    ids.resize(n, PAD);
    EncodedWindow {
        example_id: "bench".into(),
        index: 0,
        mask: ids.iter().map(|&i| if i == PAD { Attend::Ignore } else { Attend::Attend }).collect(),
        ids,
        question_len: 1,
        context_len: c,
        window_offset: 0,
        gold_spans: vec![(3, 4)],
        layout: PaddingLayout { k: 0, m, n },
    }
}
