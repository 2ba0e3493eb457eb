//! Seed derivation for reproducible trials.
//!
//! Every trial draws from its own ChaCha8 stream (`rand_chacha::ChaCha8Rng`,
//! seeded through `SeedableRng::seed_from_u64`). ChaCha output is specified
//! bit-for-bit, so runs reproduce across platforms. Trial seeds are derived
//! from `(master_seed, grid_index, trial_index)` with the SplitMix64
//! finalizer, which makes a trial's stream independent of the order or the
//! thread on which trials execute.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator used for all simulated observations.
pub type TrialRng = ChaCha8Rng;

pub const RNG_ALGORITHM: &str = "ChaCha8 (rand_chacha 0.3), SplitMix64 seed derivation";

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stable per-trial seed.
pub fn derive_seed(master_seed: u64, grid_index: u64, trial_index: u64) -> u64 {
    let a = splitmix64(master_seed);
    let b = splitmix64(a ^ grid_index);
    splitmix64(b ^ trial_index.rotate_left(32))
}

pub fn trial_rng(seed: u64) -> TrialRng {
    ChaCha8Rng::seed_from_u64(seed)
}
