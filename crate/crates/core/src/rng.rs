//! Seeded random streams.
//!
//! Every stochastic model draws from its own ChaCha8 stream whose 256-bit key
//! is `SHA-256(master_seed_le ‖ 0x00 ‖ model ‖ 0x00 ‖ target)`. Streams for
//! different `(model, target)` labels are independent, so adding a model or a
//! target never shifts the draws of another one.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

pub type Stream = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StreamFactory {
    seed: u64,
}

impl StreamFactory {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self, model: &str, target: &str) -> Stream {
        let mut h = Sha256::new();
        h.update(self.seed.to_le_bytes());
        h.update([0u8]);
        h.update(model.as_bytes());
        h.update([0u8]);
        h.update(target.as_bytes());
        let digest = h.finalize();
        let mut key = [0u8; 32];
        key.copy_from_slice(&digest);
        ChaCha8Rng::from_seed(key)
    }
}
