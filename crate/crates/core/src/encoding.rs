//! Word-level vocabulary and window assembly:
//! `[CLS] question [SEP] context [SEP] [PAD]...`, with long contexts split
//! into overlapping windows.

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{Dataset, QAExample};
use crate::error::{Error, Result};

pub const CLS: u32 = 0;
pub const SEP: u32 = 1;
pub const PAD: u32 = 2;
pub const UNK: u32 = 3;
pub const RESERVED: [&str; 4] = ["[CLS]", "[SEP]", "[PAD]", "[UNK]"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocab {
    words: Vec<String>,
    index: HashMap<String, u32>,
}

impl Vocab {
    /// Build from content words in id order (ids start after the reserved block).
    pub fn from_words<I: IntoIterator<Item = String>>(content: I) -> Result<Self> {
        let mut words: Vec<String> = RESERVED.iter().map(|s| s.to_string()).collect();
        words.extend(content);
        let mut index = HashMap::with_capacity(words.len());
        for (i, w) in words.iter().enumerate() {
            if index.insert(w.clone(), i as u32).is_some() {
                return Err(Error::Invalid(format!("duplicate vocabulary word `{w}`")));
            }
        }
        Ok(Vocab { words, index })
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn id(&self, word: &str) -> u32 {
        self.index.get(word).copied().unwrap_or(UNK)
    }

    pub fn word(&self, id: u32) -> &str {
        &self.words[id as usize]
    }

    pub fn decode(&self, ids: &[u32]) -> String {
        ids.iter()
            .map(|&i| self.word(i))
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// One content word per line; reserved ids are implicit.
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        for w in &self.words[RESERVED.len()..] {
            writeln!(f, "{w}").map_err(|e| Error::io(path, e))?;
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Vocab::from_words(text.lines().map(str::to_string))
    }
}

/// Keep the `max_size - 4` most frequent words of questions and contexts.
/// Ties go to the lexicographically smaller word.
pub fn build_vocab(d: &Dataset, max_size: usize) -> Result<Vocab> {
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for ex in &d.examples {
        for w in ex.question.iter().chain(ex.context.iter()) {
            *counts.entry(w.as_str()).or_default() += 1;
        }
    }
    let mut ranked: Vec<(&str, usize)> = counts
        .into_iter()
        .filter(|(w, _)| !RESERVED.contains(w))
        .collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
    let budget = max_size.saturating_sub(RESERVED.len());
    Vocab::from_words(ranked.into_iter().take(budget).map(|(w, _)| w.to_string()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Attend {
    Attend,
    Ignore,
}

/// Where the non-pad tokens sit: `k` front pads after `[CLS]`, `m` non-pad
/// tokens, capacity `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PaddingLayout {
    pub k: usize,
    pub m: usize,
    pub n: usize,
}

impl PaddingLayout {
    pub fn pad_budget(&self) -> usize {
        self.n - self.m
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodedWindow {
    pub example_id: String,
    /// Index of this window within its example.
    pub index: usize,
    pub ids: Vec<u32>,
    pub mask: Vec<Attend>,
    pub question_len: usize,
    pub context_len: usize,
    /// Word index of this window's first context word.
    pub window_offset: usize,
    pub gold_spans: Vec<(usize, usize)>,
    pub layout: PaddingLayout,
}

impl EncodedWindow {
    pub fn capacity(&self) -> usize {
        self.ids.len()
    }

    pub fn non_pad(&self) -> usize {
        self.layout.m
    }

    /// Token index of the first context token.
    pub fn context_start(&self) -> usize {
        self.layout.k + self.question_len + 2
    }

    /// Token index one past the last context token (the closing `[SEP]`).
    pub fn context_end(&self) -> usize {
        self.context_start() + self.context_len
    }

    /// Stable identifier used to key random streams.
    pub fn uid(&self) -> String {
        format!("{}#{}", self.example_id, self.index)
    }

    /// Word index in the original context of the token at `token`.
    pub fn word_index(&self, token: usize) -> usize {
        self.window_offset + token - self.context_start()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowingPolicy {
    pub capacity: usize,
    pub stride: usize,
}

impl WindowingPolicy {
    /// Capacity `n` with the default stride `n / 2`.
    pub fn new(capacity: usize) -> Self {
        WindowingPolicy {
            capacity,
            stride: (capacity / 2).max(1),
        }
    }

    pub fn with_stride(capacity: usize, stride: usize) -> Self {
        WindowingPolicy { capacity, stride }
    }
}

/// Token span of a word-level mention inside `w`, if the window contains it whole.
pub fn map_answer_span(w: &EncodedWindow, word_start: usize, word_end: usize) -> Option<(usize, usize)> {
    let lo = w.window_offset;
    let hi = w.window_offset + w.context_len;
    if word_start < lo || word_end >= hi || word_start > word_end {
        return None;
    }
    let base = w.context_start();
    Some((base + word_start - lo, base + word_end - lo))
}

/// Split an example into fixed-capacity windows that together cover the context.
pub fn encode_example(x: &QAExample, v: &Vocab, p: &WindowingPolicy) -> Result<Vec<EncodedWindow>> {
    let n = p.capacity;
    let q = x.question.len();
    if q + 3 >= n {
        return Err(Error::QuestionTooLong {
            id: x.id.clone(),
            question_len: q,
            capacity: n,
        });
    }
    let room = n - q - 3;
    if p.stride == 0 || p.stride > room {
        return Err(Error::Windowing(format!(
            "stride {} must lie in [1, {room}] for example `{}`",
            p.stride, x.id
        )));
    }
    let total = x.context.len();
    let question: Vec<u32> = x.question.iter().map(|w| v.id(w)).collect();
    let mut windows = Vec::new();
    let mut offset = 0;
    loop {
        let len = room.min(total - offset);
        let mut ids = Vec::with_capacity(n);
        ids.push(CLS);
        ids.extend_from_slice(&question);
        ids.push(SEP);
        ids.extend(x.context[offset..offset + len].iter().map(|w| v.id(w)));
        ids.push(SEP);
        let m = ids.len();
        ids.resize(n, PAD);
        let mask = (0..n)
            .map(|i| if i < m { Attend::Attend } else { Attend::Ignore })
            .collect();
        let mut w = EncodedWindow {
            example_id: x.id.clone(),
            index: windows.len(),
            ids,
            mask,
            question_len: q,
            context_len: len,
            window_offset: offset,
            gold_spans: Vec::new(),
            layout: PaddingLayout { k: 0, m, n },
        };
        w.gold_spans = x
            .answers
            .iter()
            .filter_map(|a| map_answer_span(&w, a.start, a.end))
            .collect();
        windows.push(w);
        if offset + len >= total {
            break;
        }
        offset += p.stride;
    }
    Ok(windows)
}

/// Encode every example of a dataset, in order.
pub fn encode_dataset(d: &Dataset, v: &Vocab, p: &WindowingPolicy) -> Result<Vec<EncodedWindow>> {
    let mut out = Vec::new();
    for ex in &d.examples {
        out.extend(encode_example(ex, v, p)?);
    }
    Ok(out)
}
