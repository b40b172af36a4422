//! Keyed derivation of independent random streams.
//!
//! A run starts from one master seed. Every consumer of randomness (a
//! replicate, the degree sampler, the coin of one CT level, the draws inside
//! one cluster) gets its own key derived from its parent by mixing in a
//! domain tag and an index. Keys depend only on the path through the
//! hierarchy, never on evaluation order, so parallel and sequential runs see
//! the same numbers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Domain tags separating sibling streams.
pub mod domain {
    pub const REPLICATE: u64 = 0x01;
    pub const CONFIGURATION: u64 = 0x02;
    pub const CT_LEVEL: u64 = 0x03;
    pub const CLUSTER: u64 = 0x04;
    pub const HIGH_PAIRS: u64 = 0x05;
    pub const BAD_TO_LOW: u64 = 0x06;
    pub const RESIDUAL_CT: u64 = 0x07;
    pub const PAIRING: u64 = 0x08;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StreamKey(u64);

impl StreamKey {
    pub const fn new(seed: u64) -> Self {
        StreamKey(seed)
    }

    pub const fn value(self) -> u64 {
        self.0
    }

    /// Child key for `(domain, index)`.
    pub fn derive(self, domain: u64, index: u64) -> StreamKey {
        let a = splitmix(self.0 ^ domain.wrapping_mul(0x9E37_79B9_7F4A_7C15));
        StreamKey(splitmix(a ^ index.wrapping_mul(0xD1B5_4A32_D192_ED03)))
    }

    /// Child key for a signed index such as a vertex position.
    pub fn derive_signed(self, domain: u64, index: i64) -> StreamKey {
        self.derive(domain, index as u64)
    }

    pub fn rng(self) -> ChaCha8Rng {
        let mut seed = [0u8; 32];
        for (word, chunk) in seed.chunks_exact_mut(8).enumerate() {
            let v = splitmix(self.0.wrapping_add((word as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)));
            chunk.copy_from_slice(&v.to_le_bytes());
        }
        ChaCha8Rng::from_seed(seed)
    }

    /// One fair coin flip keyed on this stream.
    pub fn coin(self) -> bool {
        use rand::Rng;
        self.rng().random::<bool>()
    }
}

// SplitMix64 finalizer.
fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
