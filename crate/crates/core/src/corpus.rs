//! Dataset model, line-oriented interchange format, truncation families,
//! answer re-annotation and the synthetic key/answer task generator.

use std::collections::HashSet;
use std::fmt;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use rand::seq::IndexedRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::rng;

/// One annotated answer occurrence, word indices inclusive.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnswerMention {
    pub start: usize,
    pub end: usize,
    pub text: String,
}

impl AnswerMention {
    pub fn from_words(context: &[String], start: usize, end: usize) -> Self {
        AnswerMention {
            start,
            end,
            text: context[start..=end].join(" "),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QAExample {
    pub id: String,
    pub question: Vec<String>,
    pub context: Vec<String>,
    pub answers: Vec<AnswerMention>,
}

impl QAExample {
    /// Checks the structural invariants of one example.
    pub fn validate(&self) -> std::result::Result<(), (&'static str, String)> {
        if self.context.is_empty() {
            return Err(("context", "context must contain at least one word".into()));
        }
        for m in &self.answers {
            if m.start > m.end || m.end >= self.context.len() {
                return Err((
                    "answers",
                    format!(
                        "mention ({}, {}) outside context of {} words",
                        m.start,
                        m.end,
                        self.context.len()
                    ),
                ));
            }
            if m.text.is_empty() {
                return Err(("answers", "mention text is empty".into()));
            }
            let surface = self.context[m.start..=m.end].join(" ");
            if surface != m.text {
                return Err((
                    "answers",
                    format!("mention text {:?} does not match context words {:?}", m.text, surface),
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Val,
    Test,
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Split::Train => "train",
            Split::Val => "val",
            Split::Test => "test",
        })
    }
}

impl FromStr for Split {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(Split::Train),
            "val" => Ok(Split::Val),
            "test" => Ok(Split::Test),
            other => Err(Error::Invalid(format!("unknown split `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    pub split: Split,
    pub examples: Vec<QAExample>,
}

impl Dataset {
    pub fn new(split: Split, examples: Vec<QAExample>) -> Result<Self> {
        let d = Dataset { split, examples };
        d.check_unique_ids()?;
        Ok(d)
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    fn check_unique_ids(&self) -> Result<()> {
        let mut seen = HashSet::with_capacity(self.examples.len());
        for ex in &self.examples {
            if !seen.insert(ex.id.as_str()) {
                return Err(Error::DuplicateId(ex.id.clone()));
            }
        }
        Ok(())
    }

    /// Keep only examples whose id is in `ids`, preserving order.
    pub fn retain_ids(&self, ids: &HashSet<String>) -> Dataset {
        Dataset {
            split: self.split,
            examples: self
                .examples
                .iter()
                .filter(|e| ids.contains(&e.id))
                .cloned()
                .collect(),
        }
    }
}

/// Whitespace word splitter used everywhere a "word" is counted.
pub fn split_words(text: &str) -> Vec<String> {
    text.split_whitespace().map(str::to_string).collect()
}

fn truncate_example(ex: &QAExample, len: usize) -> QAExample {
    let keep = ex.context.len().min(len);
    QAExample {
        id: ex.id.clone(),
        question: ex.question.clone(),
        context: ex.context[..keep].to_vec(),
        // a mention straddling the cut is dropped, never clipped
        answers: ex.answers.iter().filter(|m| m.end < keep).cloned().collect(),
    }
}

fn finish_truncation(split: Split, examples: Vec<QAExample>) -> Dataset {
    let examples = match split {
        Split::Train => examples,
        Split::Val | Split::Test => examples
            .into_iter()
            .filter(|e| !e.answers.is_empty())
            .collect(),
    };
    Dataset { split, examples }
}

/// Truncate every context to at most `len` words.
pub fn truncate_fixed(d: &Dataset, len: usize) -> Result<Dataset> {
    if len == 0 {
        return Err(Error::Invalid("truncation length must be >= 1".into()));
    }
    let examples = d.examples.iter().map(|e| truncate_example(e, len)).collect();
    Ok(finish_truncation(d.split, examples))
}

/// Truncate each context to a length drawn uniformly from `[lo, hi]`, keyed
/// by `(seed, example id)`.
pub fn truncate_range(d: &Dataset, lo: usize, hi: usize, seed: u64) -> Result<Dataset> {
    if lo == 0 || lo > hi {
        return Err(Error::Invalid(format!(
            "truncation range [{lo}, {hi}] must satisfy 1 <= L1 <= L2"
        )));
    }
    let examples = d
        .examples
        .iter()
        .map(|e| {
            let len = rng::stream(seed, "truncate", &e.id, 0).random_range(lo..=hi);
            truncate_example(e, len)
        })
        .collect();
    Ok(finish_truncation(d.split, examples))
}

/// Keep one uniformly chosen mention per example.
pub fn reannotate_answers(d: &Dataset, seed: u64) -> Result<Dataset> {
    let examples = d
        .examples
        .iter()
        .map(|e| {
            let mut s = rng::stream(seed, "reannotate", &e.id, 0);
            let chosen = e
                .answers
                .choose(&mut s)
                .ok_or_else(|| Error::NoMention(e.id.clone()))?;
            Ok(QAExample {
                answers: vec![chosen.clone()],
                ..e.clone()
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Dataset {
        split: d.split,
        examples,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "law")]
pub enum LengthLaw {
    Fixed { len: usize },
    Range { lo: usize, hi: usize },
}

impl FromStr for LengthLaw {
    type Err = Error;

    /// `fixed:100` or `range:100:800`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |p: &str| {
            p.parse::<usize>()
                .map_err(|_| Error::Invalid(format!("bad length `{p}` in `{s}`")))
        };
        match parts.as_slice() {
            ["fixed", l] => Ok(LengthLaw::Fixed { len: num(l)? }),
            ["range", a, b] => Ok(LengthLaw::Range {
                lo: num(a)?,
                hi: num(b)?,
            }),
            _ => Err(Error::Invalid(format!(
                "length law `{s}`: expected fixed:L or range:L1:L2"
            ))),
        }
    }
}

impl fmt::Display for LengthLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LengthLaw::Fixed { len } => write!(f, "fixed:{len}"),
            LengthLaw::Range { lo, hi } => write!(f, "range:{lo}:{hi}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AnswerLaw {
    Uniform,
    Front,
    Rear,
}

impl FromStr for AnswerLaw {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(AnswerLaw::Uniform),
            "front" => Ok(AnswerLaw::Front),
            "rear" => Ok(AnswerLaw::Rear),
            other => Err(Error::Invalid(format!("unknown answer law `{other}`"))),
        }
    }
}

impl AnswerLaw {
    /// Inclusive range of admissible answer starts for a context of `len`
    /// words. The key word sits at `start - 1`, the answer at `start..=start+1`.
    pub fn start_range(self, len: usize) -> (usize, usize) {
        let last = len - 2;
        match self {
            AnswerLaw::Uniform => (1, last),
            AnswerLaw::Front => (1, (len.div_ceil(2) - 1).max(1)),
            AnswerLaw::Rear => ((len / 2).max(1), last),
        }
    }
}

/// Parameters of the synthetic "what follows the key word" task.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    /// Number of distinct content words; half are key words, half filler.
    pub vocab_size: usize,
    pub length: LengthLaw,
    pub answer: AnswerLaw,
    /// Probability that a background word is another key word rather than filler.
    pub distractor_rate: f64,
    pub count: usize,
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn key_pool(&self) -> usize {
        self.vocab_size / 2
    }

    pub fn filler_pool(&self) -> usize {
        self.vocab_size - self.key_pool()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Synthetic(m));
        if self.count == 0 {
            return bad("count must be >= 1".into());
        }
        if self.key_pool() < 2 || self.filler_pool() < 2 {
            return bad(format!(
                "vocab size {} too small to keep the key word unique (need >= 4)",
                self.vocab_size
            ));
        }
        if !(0.0..=1.0).contains(&self.distractor_rate) {
            return bad(format!("distractor rate {} not in [0,1]", self.distractor_rate));
        }
        let (lo, hi) = match self.length {
            LengthLaw::Fixed { len } => (len, len),
            LengthLaw::Range { lo, hi } => (lo, hi),
        };
        if lo > hi {
            return bad(format!("length range [{lo}, {hi}] has L1 > L2"));
        }
        if lo < 3 {
            return bad(format!("contexts need >= 3 words for key + answer, got {lo}"));
        }
        Ok(())
    }
}

pub fn key_word(i: usize) -> String {
    format!("k{i}")
}

pub fn filler_word(i: usize) -> String {
    format!("w{i}")
}

/// Generate a dataset of the synthetic task. Every context holds the question's
/// key word exactly once, immediately followed by the two-word answer.
pub fn generate_synthetic(spec: &SyntheticSpec, split: Split) -> Result<Dataset> {
    spec.validate()?;
    let keys = spec.key_pool();
    let fillers = spec.filler_pool();
    let examples = (0..spec.count)
        .map(|i| {
            let id = format!("{split}-{i:06}");
            let mut s = rng::stream(spec.seed, "synthetic", &id, 0);
            let len = match spec.length {
                LengthLaw::Fixed { len } => len,
                LengthLaw::Range { lo, hi } => s.random_range(lo..=hi),
            };
            let (a_lo, a_hi) = spec.answer.start_range(len);
            let start = s.random_range(a_lo..=a_hi);
            let key = s.random_range(0..keys);
            let context: Vec<String> = (0..len)
                .map(|pos| {
                    if pos == start - 1 {
                        key_word(key)
                    } else if pos == start || pos == start + 1 {
                        filler_word(s.random_range(0..fillers))
                    } else if s.random_bool(spec.distractor_rate) {
                        // any key but the question's own
                        let mut other = s.random_range(0..keys - 1);
                        if other >= key {
                            other += 1;
                        }
                        key_word(other)
                    } else {
                        filler_word(s.random_range(0..fillers))
                    }
                })
                .collect();
            let mention = AnswerMention::from_words(&context, start, start + 1);
            QAExample {
                id,
                question: vec![key_word(key)],
                context,
                answers: vec![mention],
            }
        })
        .collect();
    Ok(Dataset {
        split,
        examples,
    })
}

#[derive(Serialize)]
struct RecordOut<'a> {
    id: &'a str,
    question: String,
    context: String,
    answers: Vec<AnswerOut<'a>>,
}

#[derive(Serialize)]
struct AnswerOut<'a> {
    text: &'a str,
    word_start: usize,
    word_end: usize,
}

/// Write one JSON record per line.
pub fn save_dataset(d: &Dataset, path: &Path) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for ex in &d.examples {
        let rec = RecordOut {
            id: &ex.id,
            question: ex.question.join(" "),
            context: ex.context.join(" "),
            answers: ex
                .answers
                .iter()
                .map(|m| AnswerOut {
                    text: &m.text,
                    word_start: m.start,
                    word_end: m.end,
                })
                .collect(),
        };
        serde_json::to_writer(&mut w, &rec)
            .map_err(|e| Error::Invalid(format!("serialize {}: {e}", ex.id)))?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn str_field<'a>(obj: &'a serde_json::Map<String, Value>, line: usize, field: &str) -> Result<&'a str> {
    match obj.get(field) {
        Some(Value::String(s)) => Ok(s),
        Some(_) => Err(Error::record(line, field, "expected a string")),
        None => Err(Error::record(line, field, "missing")),
    }
}

fn usize_field(obj: &serde_json::Map<String, Value>, line: usize, field: &str) -> Result<usize> {
    match obj.get(field) {
        Some(Value::Number(n)) => n
            .as_u64()
            .map(|v| v as usize)
            .ok_or_else(|| Error::record(line, field, "expected a non-negative integer")),
        Some(_) => Err(Error::record(line, field, "expected a non-negative integer")),
        None => Err(Error::record(line, field, "missing")),
    }
}

fn parse_record(text: &str, line: usize) -> Result<QAExample> {
    let value: Value = serde_json::from_str(text)
        .map_err(|e| Error::record(line, "<record>", format!("malformed JSON: {e}")))?;
    let obj = value
        .as_object()
        .ok_or_else(|| Error::record(line, "<record>", "expected an object"))?;
    let id = str_field(obj, line, "id")?.to_string();
    let question = split_words(str_field(obj, line, "question")?);
    let context = split_words(str_field(obj, line, "context")?);
    let answers = match obj.get("answers") {
        Some(Value::Array(items)) => items
            .iter()
            .map(|item| {
                let a = item
                    .as_object()
                    .ok_or_else(|| Error::record(line, "answers", "expected objects"))?;
                Ok(AnswerMention {
                    text: str_field(a, line, "text")?.to_string(),
                    start: usize_field(a, line, "word_start")?,
                    end: usize_field(a, line, "word_end")?,
                })
            })
            .collect::<Result<Vec<_>>>()?,
        Some(_) => return Err(Error::record(line, "answers", "expected a list")),
        None => return Err(Error::record(line, "answers", "missing")),
    };
    let ex = QAExample {
        id,
        question,
        context,
        answers,
    };
    ex.validate()
        .map_err(|(field, message)| Error::record(line, field, message))?;
    Ok(ex)
}

/// Read a dataset file. Blank lines are ignored; line numbers are 1-based.
pub fn load_dataset(path: &Path, split: Split) -> Result<Dataset> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut examples = Vec::new();
    let mut seen = HashSet::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line_no = i + 1;
        let text = line.map_err(|e| Error::io(path, e))?;
        if text.trim().is_empty() {
            continue;
        }
        let ex = parse_record(&text, line_no)?;
        if !seen.insert(ex.id.clone()) {
            return Err(Error::record(line_no, "id", format!("duplicate id `{}`", ex.id)));
        }
        examples.push(ex);
    }
    Ok(Dataset { split, examples })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn words(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("t{i}")).collect()
    }

    fn example(id: &str, len: usize, spans: &[(usize, usize)]) -> QAExample {
        let context = words(len);
        let answers = spans
            .iter()
            .map(|&(s, e)| AnswerMention::from_words(&context, s, e))
            .collect();
        QAExample {
            id: id.into(),
            question: vec!["q".into()],
            context,
            answers,
        }
    }

    #[test]
    fn fixed_truncation_cuts_long_contexts() {
        let d = Dataset::new(Split::Train, vec![example("a", 800, &[(3, 4)])]).unwrap();
        let t = truncate_fixed(&d, 100).unwrap();
        assert_eq!(t.examples[0].context.len(), 100);
        assert_eq!(t.examples[0].context, d.examples[0].context[..100]);
    }

    #[test]
    fn fixed_truncation_leaves_short_contexts() {
        let d = Dataset::new(Split::Test, vec![example("a", 50, &[(3, 4)])]).unwrap();
        assert_eq!(truncate_fixed(&d, 100).unwrap(), d);
    }

    #[test]
    fn mentions_past_the_cut_are_dropped() {
        let d = Dataset::new(Split::Test, vec![example("a", 300, &[(40, 41), (150, 151)])]).unwrap();
        let t = truncate_fixed(&d, 100).unwrap();
        assert_eq!(t.len(), 1);
        let spans: Vec<_> = t.examples[0].answers.iter().map(|m| (m.start, m.end)).collect();
        assert_eq!(spans, vec![(40, 41)]);
    }

    #[test]
    fn straddling_mention_is_dropped() {
        let d = Dataset::new(Split::Train, vec![example("a", 300, &[(98, 101)])]).unwrap();
        let t = truncate_fixed(&d, 100).unwrap();
        assert!(t.examples[0].answers.is_empty());
    }

    #[test]
    fn unanswerable_kept_in_train_dropped_in_eval() {
        let ex = example("a", 300, &[(150, 151)]);
        for (split, expected) in [(Split::Train, 1), (Split::Val, 0), (Split::Test, 0)] {
            let d = Dataset::new(split, vec![ex.clone()]).unwrap();
            assert_eq!(truncate_fixed(&d, 100).unwrap().len(), expected, "{split}");
        }
    }

    #[test]
    fn degenerate_range_equals_fixed() {
        let d = Dataset::new(
            Split::Val,
            (0..20).map(|i| example(&format!("e{i}"), 150 + i, &[(10, 11), (120, 121)])).collect(),
        )
        .unwrap();
        assert_eq!(truncate_range(&d, 100, 100, 9).unwrap(), truncate_fixed(&d, 100).unwrap());
    }

    #[test]
    fn range_truncation_is_seeded() {
        let d = Dataset::new(
            Split::Train,
            (0..50).map(|i| example(&format!("e{i}"), 900, &[(1, 2)])).collect(),
        )
        .unwrap();
        let a = truncate_range(&d, 100, 800, 3).unwrap();
        assert_eq!(a, truncate_range(&d, 100, 800, 3).unwrap());
        assert_ne!(a, truncate_range(&d, 100, 800, 4).unwrap());
        for ex in &a.examples {
            assert!((100..=800).contains(&ex.context.len()));
        }
    }

    #[test]
    fn bad_truncation_parameters() {
        let d = Dataset::new(Split::Train, vec![]).unwrap();
        assert!(truncate_fixed(&d, 0).is_err());
        assert!(truncate_range(&d, 0, 5, 0).is_err());
        assert!(truncate_range(&d, 6, 5, 0).is_err());
    }

    #[test]
    fn reannotation_keeps_one_member() {
        let d = Dataset::new(
            Split::Train,
            vec![example("a", 20, &[(10, 10)]), example("b", 300, &[(10, 10), (200, 200)])],
        )
        .unwrap();
        let r = reannotate_answers(&d, 1).unwrap();
        assert_eq!(r.examples[0].answers, d.examples[0].answers);
        assert_eq!(r.examples[1].answers.len(), 1);
        assert!(d.examples[1].answers.contains(&r.examples[1].answers[0]));
        assert_eq!(
            r.examples.iter().map(|e| &e.id).collect::<Vec<_>>(),
            d.examples.iter().map(|e| &e.id).collect::<Vec<_>>()
        );
    }

    #[test]
    fn reannotation_requires_a_mention() {
        let d = Dataset::new(Split::Train, vec![example("a", 20, &[])]).unwrap();
        let err = reannotate_answers(&d, 1).unwrap_err();
        assert!(err.to_string().contains("no mention to select"));
    }

    #[test]
    fn synthetic_fixed_length() {
        let spec = SyntheticSpec {
            vocab_size: 40,
            length: LengthLaw::Fixed { len: 100 },
            answer: AnswerLaw::Uniform,
            distractor_rate: 0.3,
            count: 1,
            seed: 0,
        };
        let d = generate_synthetic(&spec, Split::Train).unwrap();
        assert_eq!(d.examples[0].context.len(), 100);
        assert_eq!(d.examples[0].answers.len(), 1);
        d.examples[0].validate().unwrap();
    }

    #[test]
    fn synthetic_rear_law() {
        let spec = SyntheticSpec {
            vocab_size: 40,
            length: LengthLaw::Fixed { len: 400 },
            answer: AnswerLaw::Rear,
            distractor_rate: 0.5,
            count: 200,
            seed: 5,
        };
        for ex in generate_synthetic(&spec, Split::Test).unwrap().examples {
            assert!((200..=399).contains(&ex.answers[0].start));
            assert!(ex.answers[0].end <= 399);
        }
    }

    #[test]
    fn synthetic_key_is_unique_and_locates_gold() {
        let spec = SyntheticSpec {
            vocab_size: 10,
            length: LengthLaw::Range { lo: 3, hi: 60 },
            answer: AnswerLaw::Uniform,
            distractor_rate: 1.0,
            count: 300,
            seed: 11,
        };
        let d = generate_synthetic(&spec, Split::Train).unwrap();
        for ex in &d.examples {
            let key = &ex.question[0];
            let hits: Vec<usize> = (0..ex.context.len()).filter(|&i| &ex.context[i] == key).collect();
            assert_eq!(hits.len(), 1, "{}", ex.id);
            assert_eq!(ex.answers[0].start, hits[0] + 1);
            ex.validate().unwrap();
        }
        assert_eq!(d, generate_synthetic(&spec, Split::Train).unwrap());
    }

    #[test]
    fn synthetic_rejects_tiny_vocab() {
        let spec = SyntheticSpec {
            vocab_size: 3,
            length: LengthLaw::Fixed { len: 10 },
            answer: AnswerLaw::Uniform,
            distractor_rate: 0.0,
            count: 1,
            seed: 0,
        };
        assert!(matches!(generate_synthetic(&spec, Split::Train), Err(Error::Synthetic(_))));
    }

    #[test]
    fn length_law_parsing() {
        assert_eq!("fixed:25".parse::<LengthLaw>().unwrap(), LengthLaw::Fixed { len: 25 });
        assert_eq!(
            "range:4:60".parse::<LengthLaw>().unwrap(),
            LengthLaw::Range { lo: 4, hi: 60 }
        );
        assert!("fixed".parse::<LengthLaw>().is_err());
    }

    #[test]
    fn save_load_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.jsonl");
        let d = Dataset::new(
            Split::Val,
            vec![example("a", 12, &[(1, 2), (5, 5)]), example("b", 4, &[])],
        )
        .unwrap();
        save_dataset(&d, &path).unwrap();
        assert_eq!(load_dataset(&path, Split::Val).unwrap(), d);
    }

    #[test]
    fn missing_context_names_the_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.jsonl");
        std::fs::write(
            &path,
            "{\"id\":\"a\",\"question\":\"q\",\"context\":\"x y\",\"answers\":[]}\n\
             {\"id\":\"b\",\"question\":\"q\",\"answers\":[]}\n",
        )
        .unwrap();
        match load_dataset(&path, Split::Train) {
            Err(Error::Record { line, field, .. }) => {
                assert_eq!(line, 2);
                assert_eq!(field, "context");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn mismatched_mention_text_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.jsonl");
        std::fs::write(
            &path,
            "{\"id\":\"a\",\"question\":\"q\",\"context\":\"x y z\",\"answers\":[{\"text\":\"y x\",\"word_start\":1,\"word_end\":2}]}\n",
        )
        .unwrap();
        assert!(matches!(
            load_dataset(&path, Split::Train),
            Err(Error::Record { line: 1, .. })
        ));
    }
}
