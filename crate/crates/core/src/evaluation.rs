//! Span decoding, SQuAD-style F1/EM, answer-position buckets, segment
//! division and baseline-vs-treated prediction categories.

use std::collections::{BTreeSet, HashMap};
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{Dataset, QAExample};
use crate::encoding::{encode_dataset, map_answer_span, EncodedWindow, Vocab, WindowingPolicy};
use crate::error::{Error, Result};
use crate::model::{self, ModelParams, SpanLogits};
use crate::padshift::inference_view;

/// Best span of one window, token coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpanChoice {
    pub start: usize,
    pub end: usize,
    pub score: f64,
}

/// Highest `S·T_s + E·T_e` with `s ≤ e < s + max_len`; ties go to the smaller
/// `s`, then the smaller `e`.
pub fn decode_span(logits: &SpanLogits, max_len: usize) -> Result<SpanChoice> {
    let n = logits.context_len();
    if n == 0 {
        return Err(Error::EmptyContext);
    }
    let max_len = max_len.max(1);
    let mut best = (0, 0, f64::NEG_INFINITY);
    for s in 0..n {
        for e in s..n.min(s + max_len) {
            let score = logits.start[s] + logits.end[e];
            if score > best.2 {
                best = (s, e, score);
            }
        }
    }
    let c = logits.context_start;
    Ok(SpanChoice {
        start: best.0 + c,
        end: best.1 + c,
        score: best.2,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub id: String,
    pub text: String,
    /// Predicted start token index `P_s` in its (unshifted) window.
    #[serde(rename = "P_s")]
    pub start: usize,
    #[serde(rename = "P_e")]
    pub end: usize,
    pub window: usize,
    pub window_offset: usize,
    pub score: f64,
}

/// Lowercase, drop punctuation, collapse whitespace.
pub fn normalize_answer(text: &str) -> String {
    let lowered: String = text
        .chars()
        .flat_map(char::to_lowercase)
        .filter(|c| !c.is_ascii_punctuation())
        .collect();
    lowered.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn bag(text: &str) -> HashMap<String, usize> {
    let mut counts = HashMap::new();
    for w in normalize_answer(text).split_whitespace() {
        *counts.entry(w.to_string()).or_default() += 1;
    }
    counts
}

fn f1_single(pred: &str, gold: &str) -> f64 {
    let p = bag(pred);
    let g = bag(gold);
    let p_len: usize = p.values().sum();
    let g_len: usize = g.values().sum();
    if p_len == 0 || g_len == 0 {
        return if p_len == g_len { 100.0 } else { 0.0 };
    }
    let common: usize = p
        .iter()
        .map(|(w, &c)| c.min(g.get(w).copied().unwrap_or(0)))
        .sum();
    if common == 0 {
        return 0.0;
    }
    let precision = common as f64 / p_len as f64;
    let recall = common as f64 / g_len as f64;
    100.0 * 2.0 * precision * recall / (precision + recall)
}

/// Bag-of-words F1 in percent, maximized over gold texts.
pub fn squad_f1(pred: &str, golds: &[String]) -> f64 {
    golds
        .iter()
        .map(|g| f1_single(pred, g))
        .fold(0.0, f64::max)
}

/// 100 when the normalized prediction equals some normalized gold, else 0.
pub fn exact_match(pred: &str, golds: &[String]) -> f64 {
    let p = normalize_answer(pred);
    if golds.iter().any(|g| normalize_answer(g) == p) {
        100.0
    } else {
        0.0
    }
}

/// An evaluation set: answerable examples and their unshifted windows.
#[derive(Debug, Clone)]
pub struct EvalSet {
    pub dataset: Dataset,
    pub windows: Vec<EncodedWindow>,
    pub policy: WindowingPolicy,
}

impl EvalSet {
    pub fn new(dataset: Dataset, vocab: &Vocab, policy: WindowingPolicy) -> Result<Self> {
        let windows = encode_dataset(&dataset, vocab, &policy)?;
        Ok(EvalSet {
            dataset,
            windows,
            policy,
        })
    }
}

/// Predict one answer per example; across windows the highest score wins,
/// ties going to the earliest window.
pub fn predict(params: &ModelParams, set: &EvalSet, max_len: usize) -> Result<Vec<Prediction>> {
    let mut out = Vec::with_capacity(set.dataset.len());
    let mut cursor = 0;
    for ex in &set.dataset.examples {
        let mut best: Option<Prediction> = None;
        while cursor < set.windows.len() && set.windows[cursor].example_id == ex.id {
            let w = inference_view(&set.windows[cursor]);
            let logits = model::forward(params, w)?;
            let choice = decode_span(&logits, max_len)?;
            if best.as_ref().is_none_or(|b| choice.score > b.score) {
                let first = w.word_index(choice.start);
                let last = w.word_index(choice.end);
                best = Some(Prediction {
                    id: ex.id.clone(),
                    text: ex.context[first..=last].join(" "),
                    start: choice.start,
                    end: choice.end,
                    window: w.index,
                    window_offset: w.window_offset,
                    score: choice.score,
                });
            }
            cursor += 1;
        }
        out.push(best.ok_or_else(|| Error::Invalid(format!("example `{}` has no windows", ex.id)))?);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceScore {
    pub id: String,
    pub f1: f64,
    pub em: f64,
    /// Predicted start token index.
    pub predicted_start: usize,
    /// Token index of the earliest gold start in the unshifted layout.
    pub gold_start: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub f1: f64,
    pub em: f64,
    pub count: usize,
    pub instances: Vec<InstanceScore>,
}

fn gold_texts(ex: &QAExample) -> Vec<String> {
    ex.answers.iter().map(|a| a.text.clone()).collect()
}

/// Earliest token position of any mention, using the first window holding it.
pub fn mention_token_positions(ex: &QAExample, vocab: &Vocab, policy: &WindowingPolicy) -> Result<Vec<usize>> {
    let windows = crate::encoding::encode_example(ex, vocab, policy)?;
    ex.answers
        .iter()
        .map(|a| {
            windows
                .iter()
                .find_map(|w| map_answer_span(w, a.start, a.end))
                .map(|(s, _)| s)
                .ok_or_else(|| Error::Unmappable(ex.id.clone()))
        })
        .collect()
}

/// Score predictions against a dataset (matched by id, in dataset order).
pub fn score(predictions: &[Prediction], dataset: &Dataset, vocab: &Vocab, policy: &WindowingPolicy) -> Result<EvalReport> {
    let by_id: HashMap<&str, &Prediction> = predictions.iter().map(|p| (p.id.as_str(), p)).collect();
    let mut instances = Vec::with_capacity(dataset.len());
    for ex in &dataset.examples {
        let p = by_id
            .get(ex.id.as_str())
            .ok_or_else(|| Error::Invalid(format!("no prediction for `{}`", ex.id)))?;
        let golds = gold_texts(ex);
        let gold_start = mention_token_positions(ex, vocab, policy)
            .ok()
            .and_then(|v| v.into_iter().min());
        instances.push(InstanceScore {
            id: ex.id.clone(),
            f1: squad_f1(&p.text, &golds),
            em: exact_match(&p.text, &golds),
            predicted_start: p.start,
            gold_start,
        });
    }
    let count = instances.len();
    let mean = |f: fn(&InstanceScore) -> f64| {
        if count == 0 {
            0.0
        } else {
            instances.iter().map(f).sum::<f64>() / count as f64
        }
    };
    Ok(EvalReport {
        f1: mean(|i| i.f1),
        em: mean(|i| i.em),
        count,
        instances,
    })
}

/// Predict and score in one pass.
pub fn evaluate(params: &ModelParams, set: &EvalSet, vocab: &Vocab, max_len: usize) -> Result<(Vec<Prediction>, EvalReport)> {
    let preds = predict(params, set, max_len)?;
    let report = score(&preds, &set.dataset, vocab, &set.policy)?;
    Ok((preds, report))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BucketKey {
    /// Bucket by the predicted start `P_s`.
    #[default]
    Predicted,
    /// Bucket by the earliest gold start.
    Gold,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BucketRow {
    pub lo: usize,
    pub hi: usize,
    pub count: usize,
    /// `None` when the bucket is empty.
    pub mean_f1: Option<f64>,
}

/// Mean F1 per `[lo, lo + width)` bucket of start position over `[0, capacity)`.
pub fn bucket_by_position(instances: &[InstanceScore], width: usize, capacity: usize, key: BucketKey) -> Vec<BucketRow> {
    let width = width.max(1);
    let buckets = capacity.div_ceil(width).max(1);
    let mut sums = vec![(0usize, 0.0f64); buckets];
    for inst in instances {
        let pos = match key {
            BucketKey::Predicted => Some(inst.predicted_start),
            BucketKey::Gold => inst.gold_start,
        };
        if let Some(pos) = pos {
            let b = (pos / width).min(buckets - 1);
            sums[b].0 += 1;
            sums[b].1 += inst.f1;
        }
    }
    sums.into_iter()
        .enumerate()
        .map(|(b, (count, total))| BucketRow {
            lo: b * width,
            hi: (b + 1) * width,
            count,
            mean_f1: (count > 0).then(|| total / count as f64),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmentPair {
    pub x: usize,
    pub first: BTreeSet<String>,
    pub second: BTreeSet<String>,
}

/// First segment: some mention starts at token position `≤ x`; second: the rest.
pub fn split_segments(d: &Dataset, x: usize, vocab: &Vocab, policy: &WindowingPolicy) -> Result<SegmentPair> {
    let mut pair = SegmentPair {
        x,
        first: BTreeSet::new(),
        second: BTreeSet::new(),
    };
    for ex in &d.examples {
        let positions = mention_token_positions(ex, vocab, policy)?;
        if positions.iter().any(|&p| p <= x) {
            pair.first.insert(ex.id.clone());
        } else {
            pair.second.insert(ex.id.clone());
        }
    }
    Ok(pair)
}

/// Mean F1 over the instances whose id is in `ids`; `None` if none are.
pub fn subset_f1(instances: &[InstanceScore], ids: &BTreeSet<String>) -> Option<f64> {
    let scores: Vec<f64> = instances
        .iter()
        .filter(|i| ids.contains(&i.id))
        .map(|i| i.f1)
        .collect();
    (!scores.is_empty()).then(|| scores.iter().sum::<f64>() / scores.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Improvement {
    /// Better F1 and no word in common with the baseline prediction.
    Correction,
    /// Better F1 while overlapping the baseline prediction.
    Boundary,
    NotImproved,
}

pub fn categorize_improvement(base: &str, improved: &str, golds: &[String]) -> Improvement {
    if squad_f1(improved, golds) <= squad_f1(base, golds) {
        return Improvement::NotImproved;
    }
    let b = bag(base);
    if bag(improved).keys().any(|w| b.contains_key(w)) {
        Improvement::Boundary
    } else {
        Improvement::Correction
    }
}

pub fn save_predictions(preds: &[Prediction], path: &Path) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for p in preds {
        serde_json::to_writer(&mut w, p).map_err(|e| Error::Invalid(e.to_string()))?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn load_predictions(path: &Path) -> Result<Vec<Prediction>> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(
            serde_json::from_str(&line)
                .map_err(|e| Error::record(i + 1, "<prediction>", e.to_string()))?,
        );
    }
    Ok(out)
}
