//! Seed derivation and the per-arm random stream.
//!
//! Every (master seed, run, arm) triple maps to its own ChaCha8 stream, so the
//! samples an arm produces never depend on which worker ran the episode or on
//! how the strategy interleaved its pulls.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// One step of the SplitMix64 output function.
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(GOLDEN);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Hash of `(master_seed, run_index, arm_index)` into a single 64-bit seed.
pub fn derive_seed(master_seed: u64, run_index: u64, arm_index: u64) -> u64 {
    let mut s = master_seed;
    let mut h = splitmix64(&mut s);
    for word in [run_index, arm_index] {
        let mut s = h ^ word.wrapping_mul(GOLDEN);
        h = splitmix64(&mut s);
    }
    h
}

/// Random state owned by a single arm of a single episode.
#[derive(Debug, Clone)]
pub struct RngState {
    inner: ChaCha8Rng,
}

impl RngState {
    pub fn from_seed(seed: u64) -> Self {
        let mut s = seed;
        let mut key = [0u8; 32];
        for chunk in key.chunks_exact_mut(8) {
            chunk.copy_from_slice(&splitmix64(&mut s).to_le_bytes());
        }
        Self {
            inner: ChaCha8Rng::from_seed(key),
        }
    }

    pub fn for_arm(master_seed: u64, run_index: u64, arm_index: u64) -> Self {
        Self::from_seed(derive_seed(master_seed, run_index, arm_index))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform draw on `[0, 1)` with 53 bits of precision.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}
