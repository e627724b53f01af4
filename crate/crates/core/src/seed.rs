//! Seeded randomness contract: same seed + same config gives bit-identical
//! simulations and masks, independent of evaluation order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// 64-bit reproducibility seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Seed(pub u64);

impl Seed {
    pub fn rng(self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.0)
    }

    /// Derive an independent child seed from this one and a list of indices.
    /// Used for per-sample noise streams and sweep repetitions.
    pub fn derive(self, indices: &[u64]) -> Seed {
        let mut state = splitmix64(self.0 ^ 0x9e37_79b9_7f4a_7c15);
        for &idx in indices {
            state = splitmix64(state ^ idx.wrapping_mul(0xbf58_476d_1ce4_e5b9));
        }
        Seed(state)
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Stable 64-bit FNV-1a over bytes; used for config and parameter hashes
/// recorded in manifests.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}
