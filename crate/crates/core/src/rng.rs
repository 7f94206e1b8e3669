//! Labeled, hierarchical RNG streams.
//!
//! Every random quantity in the crate is drawn from a ChaCha stream whose key
//! is the SHA-256 of `(label, master seed, indices...)`. Two streams with
//! different labels or indices are independent, and a stream never depends on
//! how many values other streams consumed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

pub type StreamRng = ChaCha8Rng;

pub fn derive_key(label: &str, master: u64, indices: &[u64]) -> [u8; 32] {
    let mut hasher = Sha256::new();
    hasher.update((label.len() as u64).to_le_bytes());
    hasher.update(label.as_bytes());
    hasher.update(master.to_le_bytes());
    for i in indices {
        hasher.update(i.to_le_bytes());
    }
    hasher.finalize().into()
}

pub fn stream(label: &str, master: u64, indices: &[u64]) -> StreamRng {
    StreamRng::from_seed(derive_key(label, master, indices))
}

/// A 64-bit child seed, for handing to APIs that take a plain integer seed.
pub fn derive_seed(label: &str, master: u64, indices: &[u64]) -> u64 {
    let key = derive_key(label, master, indices);
    u64::from_le_bytes(key[..8].try_into().expect("8-byte prefix"))
}
