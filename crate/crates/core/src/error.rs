use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: field `{field}`: {message}")]
    Record {
        line: usize,
        field: String,
        message: String,
    },

    #[error("duplicate example id `{0}`")]
    DuplicateId(String),

    #[error("example `{0}`: no mention to select")]
    NoMention(String),

    #[error("invalid synthetic spec: {0}")]
    Synthetic(String),

    #[error("example `{id}`: question of {question_len} tokens leaves no room in capacity {capacity}")]
    QuestionTooLong {
        id: String,
        question_len: usize,
        capacity: usize,
    },

    #[error("invalid windowing policy: {0}")]
    Windowing(String),

    #[error("shift k={k} out of range [0, {max}]")]
    ShiftOutOfRange { k: usize, max: usize },

    #[error("window already shifted by k={0}")]
    AlreadyShifted(usize),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("span ({s}, {e}) outside context range [{lo}, {hi}]")]
    SpanOutOfRange {
        s: usize,
        e: usize,
        lo: usize,
        hi: usize,
    },

    #[error("window has no context tokens")]
    EmptyContext,

    #[error("non-finite gradient in `{tensor}` at index {index}: {value}")]
    NonFiniteGradient {
        tensor: String,
        index: usize,
        value: f64,
    },

    #[error("epoch {0}: every batch was skipped (no window carries a gold span)")]
    AllSkipped(usize),

    #[error("example `{0}`: answer mention cannot be mapped to token coordinates")]
    Unmappable(String),

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error("config: {0}")]
    Config(String),

    #[error("experiment `{plan}`{}: {message}", seed.map(|s| format!(" seed {s}")).unwrap_or_default())]
    Experiment {
        plan: String,
        seed: Option<u64>,
        message: String,
    },

    #[error("{0}")]
    Invalid(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn record(line: usize, field: &str, message: impl Into<String>) -> Self {
        Error::Record {
            line,
            field: field.to_string(),
            message: message.into(),
        }
    }
}
