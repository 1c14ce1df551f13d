//! Extractive-QA fine-tuning lab built around Random Padding: moving a random
//! number of trailing `[PAD]` tokens to just after `[CLS]` during training so
//! that rear position embeddings get updated as often as front ones.
//!
//! Modules follow the data flow: [`corpus`] → [`encoding`] → [`padshift`] →
//! [`model`] → [`training`] → [`evaluation`] → [`experiments`].

pub mod config;
pub mod corpus;
pub mod encoding;
pub mod error;
pub mod evaluation;
pub mod experiments;
pub mod model;
pub mod padshift;
pub mod rng;
pub mod training;

pub use corpus::{AnswerMention, Dataset, QAExample, Split, SyntheticSpec};
pub use encoding::{EncodedWindow, PaddingLayout, Vocab, WindowingPolicy};
pub use error::{Error, Result};
pub use model::{Gradients, ModelConfig, ModelParams, SpanLogits};
pub use padshift::{ShiftMode, ShiftPolicy};
