//! Seed derivation for independent, schedule-free random streams.
//!
//! Every replication draws from its own ChaCha stream keyed by
//! `(master, experiment, replication)`, so results do not depend on which
//! worker thread picks up which replication.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// The generator used throughout the crate.
pub type Rng = ChaCha12Rng;

/// Splittable seed source.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedStream {
    pub master: u64,
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl SeedStream {
    pub fn new(master: u64) -> Self {
        Self { master }
    }

    /// A derived stream for a named sub-experiment.
    pub fn substream(&self, tag: u64) -> SeedStream {
        SeedStream {
            master: splitmix(self.master ^ splitmix(tag.wrapping_add(0x5851_F42D_4C95_7F2D))),
        }
    }

    /// 64-bit seed of replication `index`.
    pub fn seed(&self, index: u64) -> u64 {
        splitmix(splitmix(self.master) ^ index.wrapping_mul(0xD6E8_FEB8_6659_FD93))
    }

    /// Generator of replication `index`.
    pub fn rng(&self, index: u64) -> Rng {
        rng_from_seed(self.seed(index))
    }
}

/// Expands a 64-bit seed into a full ChaCha key.
pub fn rng_from_seed(seed: u64) -> Rng {
    let mut key = [0u8; 32];
    let mut z = seed;
    for chunk in key.chunks_exact_mut(8) {
        z = splitmix(z);
        chunk.copy_from_slice(&z.to_le_bytes());
    }
    Rng::from_seed(key)
}

/// Stable 64-bit tag for a string label.
pub fn tag(label: &str) -> u64 {
    label.bytes().fold(0xCBF2_9CE4_8422_2325u64, |h, b| {
        (h ^ b as u64).wrapping_mul(0x100_0000_01B3)
    })
}
