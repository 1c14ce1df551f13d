//! Keyed random streams.
//!
//! Every stochastic choice in the lab draws from a stream derived from
//! `(seed, domain, key, index)`, so results do not depend on iteration order
//! or on how work is split across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

pub type Stream = ChaCha8Rng;

/// Derive an independent stream for one `(seed, domain, key, index)` tuple.
pub fn stream(seed: u64, domain: &str, key: &str, index: u64) -> Stream {
    let mut hasher = Sha256::new();
    hasher.update(domain.as_bytes());
    hasher.update([0u8]);
    hasher.update(seed.to_le_bytes());
    hasher.update(key.as_bytes());
    hasher.update([0u8]);
    hasher.update(index.to_le_bytes());
    let digest = hasher.finalize();
    let mut bytes = [0u8; 32];
    bytes.copy_from_slice(&digest);
    ChaCha8Rng::from_seed(bytes)
}

/// Hex SHA-256 of arbitrary bytes; used for order hashes and manifests.
pub fn sha256_hex(data: &[u8]) -> String {
    hex::encode(Sha256::digest(data))
}
