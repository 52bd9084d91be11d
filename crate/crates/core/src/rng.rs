//! Seeded random streams.
//!
//! Every chain and every replicate owns its own ChaCha8 stream. Sub-seeds are
//! a pure function of the master seed and the replicate index, so adding or
//! dropping replicates never perturbs the others.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SeededRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for replicate `r` of a run started from `master`.
pub fn sub_seed(master: u64, replicate: u64) -> u64 {
    splitmix64(master ^ splitmix64(replicate.wrapping_add(0xA076_1D64_78BD_642F)))
}
