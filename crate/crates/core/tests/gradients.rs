//! Analytic gradients against a central finite-difference oracle.

mod common;

use std::time::Instant;

use randpad_core::encoding::Attend;
use randpad_core::model::{self, ModelParams};
use randpad_core::padshift;
use randpad_core::rng;

const STEP: f64 = 1e-4;

fn loss_at(p: &ModelParams, w: &randpad_core::EncodedWindow) -> f64 {
    model::window_loss(p, w).unwrap().unwrap()
}

/// Returns (worst relative error among entries above the absolute floor, count checked).
fn check_all_entries(p: &ModelParams, w: &randpad_core::EncodedWindow) -> (f64, usize) {
    let (_, grads) = model::backward(p, w, w.gold_spans[0]).unwrap();
    let mut probe = p.clone();
    let mut worst: f64 = 0.0;
    let mut count = 0;
    let n_tensors = p.tensors().len();
    for t in 0..n_tensors {
        let len = p.tensors()[t].len();
        for i in 0..len {
            let orig = p.tensors()[t][i];
            probe.tensors_mut()[t][i] = orig + STEP;
            let up = loss_at(&probe, w);
            probe.tensors_mut()[t][i] = orig - STEP;
            let down = loss_at(&probe, w);
            probe.tensors_mut()[t][i] = orig;
            let numeric = (up - down) / (2.0 * STEP);
            let analytic = grads.tensors()[t][i];
            let diff = (numeric - analytic).abs();
            count += 1;
            if diff < 1e-8 {
                continue;
            }
            let rel = diff / numeric.abs().max(analytic.abs());
            worst = worst.max(rel);
            assert!(rel < 1e-4, "tensor {t} entry {i}: analytic {analytic} numeric {numeric} rel {rel}");
        }
    }
    (worst, count)
}

#[test]
fn small_model_matches_finite_differences() {
    let cfg = common::config(12, 12, 8, 2, 2, 12);
    let p = common::random_params(cfg, 1);
    let mut r = rng::stream(1, "fd-small", "", 0);
    let start = Instant::now();
    for _ in 0..5 {
        let w = common::random_window(&mut r, 12, 12, 2, 6);
        let (worst, n) = check_all_entries(&p, &w);
        assert_eq!(n, p.num_params());
        assert!(worst < 1e-4);
    }
    eprintln!("small fd: {:?}", start.elapsed());
}

#[test]
fn shifted_window_matches_finite_differences() {
    let cfg = common::config(10, 14, 8, 1, 2, 8);
    let p = common::random_params(cfg, 2);
    let mut r = rng::stream(2, "fd-shift", "", 0);
    let w = common::random_window(&mut r, 14, 10, 2, 4);
    let k = w.layout.n - w.layout.m;
    let shifted = padshift::apply_shift(&w, k).unwrap();
    check_all_entries(&p, &shifted);
}

#[test]
fn pad_rows_and_unused_vocab_rows_are_exactly_zero() {
    let cfg = common::config(30, 16, 8, 2, 2, 16);
    let p = common::random_params(cfg, 3);
    let mut r = rng::stream(3, "zero-rows", "", 0);
    for _ in 0..50 {
        let w = common::random_window(&mut r, 16, 30, 3, 8);
        let k = rand::Rng::random_range(&mut r, 0..=w.layout.n - w.layout.m);
        let w = padshift::apply_shift(&w, k).unwrap();
        let (_, g) = model::backward(&p, &w, w.gold_spans[0]).unwrap();
        let h = cfg.hidden;
        for pos in 0..16 {
            let row = &g.position_embedding[pos * h..(pos + 1) * h];
            if w.mask[pos] == Attend::Ignore {
                assert!(row.iter().all(|&x| x == 0.0), "pos {pos}");
            }
        }
        for id in 0..30u32 {
            let used = (0..16).any(|i| w.mask[i] == Attend::Attend && w.ids[i] == id);
            if !used {
                assert!(g.token_embedding[id as usize * h..(id as usize + 1) * h].iter().all(|&x| x == 0.0));
            }
        }
    }
}
