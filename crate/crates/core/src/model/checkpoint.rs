//! Checkpoint file: one JSON header line, then every tensor as contiguous
//! little-endian `f64` values in header order.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::params::{tensor_shapes, ModelConfig, ModelParams};
use crate::error::{Error, Result};

pub const FORMAT: &str = "randpad-checkpoint";
pub const VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct TensorEntry {
    name: String,
    rows: usize,
    cols: usize,
    /// Byte offset from the first byte after the header newline.
    offset: usize,
}

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    format: String,
    version: u32,
    config: ModelConfig,
    tensors: Vec<TensorEntry>,
}

pub fn to_bytes(p: &ModelParams) -> Vec<u8> {
    let mut offset = 0;
    let tensors = tensor_shapes(&p.config)
        .into_iter()
        .map(|(name, (rows, cols))| {
            let e = TensorEntry {
                name,
                rows,
                cols,
                offset,
            };
            offset += rows * cols * 8;
            e
        })
        .collect();
    let header = Header {
        format: FORMAT.into(),
        version: VERSION,
        config: p.config,
        tensors,
    };
    let mut out = serde_json::to_vec(&header).expect("header serializes");
    out.push(b'\n');
    for t in p.tensors() {
        for x in t {
            out.extend_from_slice(&x.to_le_bytes());
        }
    }
    out
}

pub fn from_bytes(bytes: &[u8]) -> Result<ModelParams> {
    let bad = |m: String| Error::Checkpoint(m);
    let nl = bytes
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| bad("missing header line".into()))?;
    let header: Header =
        serde_json::from_slice(&bytes[..nl]).map_err(|e| bad(format!("header: {e}")))?;
    if header.format != FORMAT || header.version != VERSION {
        return Err(bad(format!(
            "unsupported format {} v{}",
            header.format, header.version
        )));
    }
    header.config.validate()?;
    let expected = tensor_shapes(&header.config);
    if expected.len() != header.tensors.len() {
        return Err(bad("tensor count does not match config".into()));
    }
    let data = &bytes[nl + 1..];
    let mut p = ModelParams::zeros(header.config);
    for ((entry, (name, shape)), dst) in header
        .tensors
        .iter()
        .zip(&expected)
        .zip(p.tensors_mut())
    {
        if &entry.name != name || (entry.rows, entry.cols) != *shape {
            return Err(bad(format!("unexpected tensor {} {:?}", entry.name, (entry.rows, entry.cols))));
        }
        let len = entry.rows * entry.cols * 8;
        let src = data
            .get(entry.offset..entry.offset + len)
            .ok_or_else(|| bad(format!("tensor {} truncated", entry.name)))?;
        for (x, chunk) in dst.iter_mut().zip(src.chunks_exact(8)) {
            *x = f64::from_le_bytes(chunk.try_into().expect("8-byte chunk"));
        }
    }
    Ok(p)
}

pub fn save(p: &ModelParams, path: &Path) -> Result<()> {
    fs::write(path, to_bytes(p)).map_err(|e| Error::io(path, e))
}

pub fn load(path: &Path) -> Result<ModelParams> {
    from_bytes(&fs::read(path).map_err(|e| Error::io(path, e))?)
}
