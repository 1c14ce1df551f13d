use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use randpad_bench::{config, params, window};
use randpad_core::evaluation::decode_span;
use randpad_core::model;
use randpad_core::padshift::{apply_shift, ShiftMode, ShiftPolicy};

fn forward_backward(c: &mut Criterion) {
    let mut group = c.benchmark_group("model");
    for (n, m) in [(32, 11), (64, 32), (128, 64)] {
        let p = params(config(n, 64));
        let w = window(m, n);
        group.bench_with_input(BenchmarkId::new("forward", n), &w, |b, w| b.iter(|| model::forward(&p, w).unwrap()));
        group.bench_with_input(BenchmarkId::new("backward", n), &w, |b, w| {
            b.iter(|| model::backward(&p, w, w.gold_spans[0]).unwrap())
        });
    }
    group.finish();
}

fn shifting(c: &mut Criterion) {
    let w = window(40, 128);
    let policy = ShiftPolicy::new(ShiftMode::Full, 3);
    c.bench_function("shift_for", |b| b.iter(|| policy.shift_for("bench#0", 2, 40, 128)));
    c.bench_function("apply_shift", |b| b.iter(|| apply_shift(&w, 50).unwrap()));
}

fn decoding(c: &mut Criterion) {
    let p = params(config(128, 32));
    let logits = model::forward(&p, &window(128, 128)).unwrap();
    c.bench_function("decode_span/124", |b| b.iter(|| decode_span(&logits, 30).unwrap()));
}

criterion_group!(benches, forward_backward, shifting, decoding);
criterion_main!(benches);
