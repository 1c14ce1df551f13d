//! Minimal transformer encoder with learned absolute position embeddings and
//! the `S·T_s + E·T_e` span head.

pub mod checkpoint;
mod encoder;
pub mod linalg;
mod params;

pub use encoder::{accumulate_gradients, backward, forward, loss, span_score, window_loss, SpanLogits};
pub use params::{randomize, tensor_shapes, Gradients, LayerParams, ModelConfig, ModelParams};
