//! Named random streams.
//!
//! Every consumer of randomness derives its generator from the user seed and a
//! purpose string, so adding a consumer never shifts the draws of another.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

pub type StreamRng = ChaCha8Rng;

/// Generator for `(seed, purpose)`.
pub fn stream(seed: u64, purpose: &str) -> StreamRng {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update((purpose.len() as u64).to_le_bytes());
    h.update(purpose.as_bytes());
    let digest = h.finalize();
    let mut key = [0u8; 32];
    key.copy_from_slice(&digest);
    ChaCha8Rng::from_seed(key)
}

/// Generator for item `index` of a family of streams, e.g. trial `i` of a
/// random search.
pub fn substream(seed: u64, purpose: &str, index: u64) -> StreamRng {
    let mut rng = stream(seed, purpose);
    rng.set_stream(index);
    rng
}
