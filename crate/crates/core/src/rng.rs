//! Seeded, portable randomness.
//!
//! Every sampler draws from [`ChaCha8Rng`], whose output is specified
//! independently of platform and word size. Batch jobs derive one stream per
//! item: item `i` of a run seeded with `s` reads ChaCha stream `i` of key `s`,
//! so items can be generated in any order or in parallel with identical output.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RngSeed(pub u64);

impl RngSeed {
    pub fn rng(self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.0)
    }

    /// Independent generator for item `index` of a batch.
    pub fn stream(self, index: u64) -> ChaCha8Rng {
        let mut rng = self.rng();
        rng.set_stream(index);
        rng
    }

    /// A child seed for item `index`, for APIs that take a seed rather than a generator.
    pub fn derive(self, index: u64) -> RngSeed {
        use rand::RngCore;
        RngSeed(self.stream(index).next_u64())
    }
}

impl From<u64> for RngSeed {
    fn from(seed: u64) -> Self {
        RngSeed(seed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::RngCore;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let seed = RngSeed(7);
        assert_eq!(seed.stream(3).next_u64(), seed.stream(3).next_u64());
        assert_ne!(seed.stream(3).next_u64(), seed.stream(4).next_u64());
        assert_ne!(seed.derive(0), seed.derive(1));
    }

    #[test]
    fn output_is_pinned() {
        // ChaCha8 is a fixed algorithm; this value must never change across platforms.
        assert_eq!(RngSeed(42).rng().next_u64(), 12578764544318200737);
        assert_eq!(RngSeed(42).stream(0).next_u64(), 12578764544318200737);
    }
}
