mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;
use randpad_core::corpus::{AnswerMention, Dataset, QAExample, Split};
use randpad_core::encoding::{self, Attend, EncodedWindow, Vocab, WindowingPolicy, CLS, PAD};
use randpad_core::evaluation::{self, decode_span};
use randpad_core::model::SpanLogits;
use randpad_core::padshift::{apply_shift, inference_view};
use randpad_core::rng;

fn arb_window() -> impl Strategy<Value = (EncodedWindow, usize)> {
    (5usize..48, any::<u64>()).prop_flat_map(|(n, seed)| {
        let mut r = rng::stream(seed, "prop-window", "", 0);
        let w = common::random_window(&mut r, n, 50, 3.min(n - 4), n);
        let budget = n - w.layout.m;
        (Just(w), 0..=budget)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn shift_preserves_layout((w, k) in arb_window()) {
        let s = apply_shift(&w, k).unwrap();
        let n = w.capacity();
        let m = w.layout.m;
        prop_assert_eq!(s.ids.len(), n);
        prop_assert_eq!(s.ids[0], CLS);
        prop_assert_eq!(s.mask[0], Attend::Attend);
        // pads at 1..=k, original non-pad tokens after, pads to the end
        for i in 1..=k {
            prop_assert_eq!(s.ids[i], PAD);
        }
        prop_assert_eq!(&s.ids[k + 1..k + m], &w.ids[1..m]);
        prop_assert!(s.ids[k + m..].iter().all(|&t| t == PAD));
        let orig: Vec<u32> = w.ids.iter().copied().filter(|&t| t != PAD).collect();
        let shifted: Vec<u32> = s.ids.iter().copied().filter(|&t| t != PAD).collect();
        prop_assert_eq!(orig, shifted);
        for (id, mask) in s.ids.iter().zip(&s.mask) {
            prop_assert_eq!(*id == PAD, *mask == Attend::Ignore);
        }
        for (&(a, b), &(c, d)) in w.gold_spans.iter().zip(&s.gold_spans) {
            prop_assert_eq!((a + k, b + k), (c, d));
            prop_assert_eq!(&s.ids[c..=d], &w.ids[a..=b]);
        }
        prop_assert_eq!(s.layout.k, k);
        prop_assert_eq!(inference_view(&w), &w);
    }
}

fn example(id: &str, q: usize, c: usize, mentions: &[(usize, usize)]) -> QAExample {
    let context: Vec<String> = (0..c).map(|i| format!("w{}", i % 7)).collect();
    QAExample {
        id: id.into(),
        question: (0..q).map(|i| format!("q{i}")).collect(),
        answers: mentions
            .iter()
            .map(|&(s, e)| AnswerMention::from_words(&context, s, e))
            .collect(),
        context,
    }
}

fn vocab() -> Vocab {
    Vocab::from_words((0..7).map(|i| format!("w{i}")).chain((0..4).map(|i| format!("q{i}")))).unwrap()
}

fn arb_example() -> impl Strategy<Value = (QAExample, WindowingPolicy)> {
    (1usize..4, 1usize..150, 10usize..40, any::<u64>()).prop_flat_map(|(q, c, n, seed)| {
        let n = n.max(q + 4);
        let room = n - q - 3;
        (1..=room).prop_map(move |stride| {
            let mut r = rng::stream(seed, "prop-example", "", 0);
            let count = rand::Rng::random_range(&mut r, 1..4);
            let mentions: Vec<(usize, usize)> = (0..count)
                .map(|_| {
                    let s = rand::Rng::random_range(&mut r, 0..c);
                    let e = rand::Rng::random_range(&mut r, s..c.min(s + 4));
                    (s, e)
                })
                .collect();
            (example("x", q, c, &mentions), WindowingPolicy::with_stride(n, stride))
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn windows_cover_context_and_map_back((x, p) in arb_example()) {
        let v = vocab();
        let windows = encoding::encode_example(&x, &v, &p).unwrap();
        let mut covered = vec![false; x.context.len()];
        for w in &windows {
            prop_assert_eq!(w.ids.len(), p.capacity);
            for i in 0..w.context_len {
                covered[w.window_offset + i] = true;
                prop_assert_eq!(w.word_index(w.context_start() + i), w.window_offset + i);
            }
            for a in &x.answers {
                if let Some((s, e)) = encoding::map_answer_span(w, a.start, a.end) {
                    prop_assert_eq!((w.word_index(s), w.word_index(e)), (a.start, a.end));
                    prop_assert_eq!(v.decode(&w.ids[s..=e]), a.text.clone());
                }
            }
        }
        prop_assert!(covered.iter().all(|&c| c));
    }
}

/// Earliest start token position of any mention, found by scanning window
/// offsets directly.
fn brute_first_position(x: &QAExample, p: &WindowingPolicy) -> usize {
    let q = x.question.len();
    let room = p.capacity - q - 3;
    let total = x.context.len();
    let mut best = usize::MAX;
    for a in &x.answers {
        let mut offset = 0;
        loop {
            let len = room.min(total - offset);
            if a.start >= offset && a.end < offset + len {
                best = best.min(q + 2 + a.start - offset);
                break;
            }
            if offset + len >= total {
                panic!("mention not in any window");
            }
            offset += p.stride;
        }
    }
    best
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn segments_match_brute_force(seed in any::<u64>(), q in 1usize..4) {
        let p = WindowingPolicy::new(64);
        let mut r = rng::stream(seed, "prop-segments", "", 0);
        let examples: Vec<QAExample> = (0..8)
            .map(|i| {
                let c = rand::Rng::random_range(&mut r, 1..200);
                let count = rand::Rng::random_range(&mut r, 1..4);
                let mentions: Vec<(usize, usize)> = (0..count)
                    .map(|_| {
                        let s = rand::Rng::random_range(&mut r, 0..c);
                        (s, rand::Rng::random_range(&mut r, s..c.min(s + 3)))
                    })
                    .collect();
                example(&format!("e{i}"), q, c, &mentions)
            })
            .collect();
        let d = Dataset::new(Split::Test, examples).unwrap();
        let v = vocab();
        let all: BTreeSet<String> = d.examples.iter().map(|e| e.id.clone()).collect();
        let mut prev_first = BTreeSet::new();
        for x in [16, 32, 64] {
            let seg = evaluation::split_segments(&d, x, &v, &p).unwrap();
            for e in &d.examples {
                let first = brute_first_position(e, &p) <= x;
                prop_assert_eq!(seg.first.contains(&e.id), first);
            }
            prop_assert!(seg.first.is_disjoint(&seg.second));
            let union: BTreeSet<String> = seg.first.union(&seg.second).cloned().collect();
            prop_assert_eq!(&union, &all);
            prop_assert!(prev_first.is_subset(&seg.first));
            prev_first = seg.first;
        }
    }
}

const PUNCT: &str = "!\"#$%&'()*+,-./:;<=>?@[\\]^_`{|}~";

fn oracle_tokens(s: &str) -> Vec<String> {
    let mut cleaned = String::new();
    for ch in s.chars() {
        for low in ch.to_lowercase() {
            if !PUNCT.contains(low) {
                cleaned.push(low);
            }
        }
    }
    let mut t: Vec<String> = cleaned.split_whitespace().map(str::to_string).collect();
    t.sort();
    t
}

/// Bag overlap by merging two sorted token lists.
fn oracle_f1(pred: &str, gold: &str) -> f64 {
    let p = oracle_tokens(pred);
    let g = oracle_tokens(gold);
    if p.is_empty() || g.is_empty() {
        return if p.is_empty() && g.is_empty() { 100.0 } else { 0.0 };
    }
    let (mut i, mut j, mut common) = (0, 0, 0usize);
    while i < p.len() && j < g.len() {
        match p[i].cmp(&g[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                common += 1;
                i += 1;
                j += 1;
            }
        }
    }
    if common == 0 {
        return 0.0;
    }
    let precision = common as f64 / p.len() as f64;
    let recall = common as f64 / g.len() as f64;
    100.0 * 2.0 * precision * recall / (precision + recall)
}

fn oracle_em(pred: &str, gold: &str) -> f64 {
    let join = |s: &str| {
        let mut cleaned = String::new();
        for ch in s.chars().flat_map(char::to_lowercase) {
            if !PUNCT.contains(ch) {
                cleaned.push(ch);
            }
        }
        cleaned.split_whitespace().collect::<Vec<_>>().join(" ")
    };
    if join(pred) == join(gold) {
        100.0
    } else {
        0.0
    }
}

fn arb_text() -> impl Strategy<Value = String> {
    prop::collection::vec(
        prop::sample::select(vec!["the", "The", "steel", "iron,", "pig", "molten", "a", "A.", "from", "--", "", "x"]),
        0..7,
    )
    .prop_map(|w| w.join(" "))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn metrics_match_oracle(pred in arb_text(), golds in prop::collection::vec(arb_text(), 1..4)) {
        let f1 = golds.iter().map(|g| oracle_f1(&pred, g)).fold(0.0, f64::max);
        let em = golds.iter().map(|g| oracle_em(&pred, g)).fold(0.0, f64::max);
        prop_assert_eq!(evaluation::squad_f1(&pred, &golds), f1);
        prop_assert_eq!(evaluation::exact_match(&pred, &golds), em);
        let mut rev = golds.clone();
        rev.reverse();
        prop_assert_eq!(evaluation::squad_f1(&pred, &rev), f1);
    }
}

fn logits(start: Vec<f64>, end: Vec<f64>, offset: usize) -> SpanLogits {
    SpanLogits {
        context_start: offset,
        positions: Vec::new(),
        hidden: Vec::new(),
        hidden_size: 0,
        start,
        end,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn decode_matches_enumeration(
        pairs in prop::collection::vec((-3i32..3, -3i32..3), 1..12),
        max_len in 1usize..14,
        offset in 0usize..9,
    ) {
        // small integer logits make ties common
        let start: Vec<f64> = pairs.iter().map(|p| p.0 as f64).collect();
        let end: Vec<f64> = pairs.iter().map(|p| p.1 as f64).collect();
        let n = start.len();
        let mut all = Vec::new();
        for s in 0..n {
            for e in 0..n {
                if s <= e && e - s < max_len {
                    all.push((s, e, start[s] + end[e]));
                }
            }
        }
        let best = all.iter().map(|c| c.2).fold(f64::NEG_INFINITY, f64::max);
        let (s, e, _) = all.iter().copied().filter(|c| c.2 == best).min_by_key(|c| (c.0, c.1)).unwrap();
        let got = decode_span(&logits(start, end, offset), max_len).unwrap();
        prop_assert_eq!((got.start, got.end, got.score), (s + offset, e + offset, best));
    }
}
