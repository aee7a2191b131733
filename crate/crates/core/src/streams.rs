//! Deterministic random streams for a single realization.
//!
//! Every realization `r` of a plan with base seed `s` gets its own ChaCha
//! key derived from `(s, r)`. Independent consumers (point positions,
//! receiver angles, each fading row, scheduling decisions) read separate
//! ChaCha streams under that key, so the draw for one consumer never shifts
//! the draws of another. This is what makes a realization at a lower
//! density an exact prefix of the realization at a higher density.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const STREAM_POINTS: u64 = 0;
const STREAM_RECEIVERS: u64 = 1;
const STREAM_DECISIONS: u64 = 2;
const STREAM_FADING_BASE: u64 = 1 << 32;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of realization `index` under `base_seed`. Distinct indices map to
/// distinct seeds.
pub fn derive_seed(base_seed: u64, index: u64) -> u64 {
    // splitmix64 is a bijection, so the inner xor keeps indices distinct.
    splitmix64(splitmix64(base_seed) ^ index)
}

/// Family of independent random streams for one realization.
#[derive(Debug, Clone)]
pub struct SeedStreams {
    seed: u64,
}

impl SeedStreams {
    pub fn new(seed: u64) -> Self {
        SeedStreams { seed }
    }

    /// Streams for realization `index` of a plan seeded with `base_seed`.
    pub fn for_realization(base_seed: u64, index: u64) -> Self {
        SeedStreams::new(derive_seed(base_seed, index))
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    fn stream(&self, id: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(id);
        rng
    }

    pub fn points(&self) -> ChaCha8Rng {
        self.stream(STREAM_POINTS)
    }

    pub fn receivers(&self) -> ChaCha8Rng {
        self.stream(STREAM_RECEIVERS)
    }

    /// Fading gains into receiver `rx`, read in transmitter order.
    pub fn fading_row(&self, rx: usize) -> ChaCha8Rng {
        self.stream(STREAM_FADING_BASE + rx as u64)
    }

    /// Randomness consumed by scheduling decisions (SIR errors, coin flips).
    pub fn decisions(&self) -> ChaCha8Rng {
        self.stream(STREAM_DECISIONS)
    }
}
