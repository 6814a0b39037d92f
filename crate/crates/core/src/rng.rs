//! Counter-based random number derivation for reproducible parallel runs.
//!
//! Every random quantity in this crate is a pure function of
//! `(seed, stream, counter)`: the trial index (or row index, or sweep index)
//! selects an independent ChaCha8 generator, so trials can be evaluated in
//! any order, on any number of threads, and still produce identical results.

use num_complex::Complex64;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Stream tag for user-channel draws.
pub const STREAM_CHANNEL: u64 = 0x4348414e;
/// Stream tag for target-response rows.
pub const STREAM_TARGET: u64 = 0x54524754;
/// Stream tag for synthetic eigenvector bases.
pub const STREAM_UNITARY: u64 = 0x554e4954;

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

#[inline]
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(GOLDEN);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives the generator for one `(seed, stream, counter)` cell.
///
/// The 256-bit ChaCha key is expanded from the three inputs with a
/// splitmix64 chain, so distinct cells get statistically independent keys.
pub fn trial_rng(seed: u64, stream: u64, counter: u64) -> ChaCha8Rng {
    let mut state = seed;
    let a = splitmix64(&mut state);
    state ^= stream.wrapping_mul(GOLDEN | 1);
    let b = splitmix64(&mut state);
    state ^= counter.wrapping_mul(0xc2b2_ae3d_27d4_eb4f);
    let c = splitmix64(&mut state);
    let d = splitmix64(&mut state);

    let mut key = [0u8; 32];
    key[0..8].copy_from_slice(&a.to_le_bytes());
    key[8..16].copy_from_slice(&b.to_le_bytes());
    key[16..24].copy_from_slice(&c.to_le_bytes());
    key[24..32].copy_from_slice(&d.to_le_bytes());
    ChaCha8Rng::from_seed(key)
}

/// One draw from the circularly-symmetric complex normal CN(0, 1),
/// i.e. `(x + iy)/sqrt(2)` with `x, y` standard real normal.
#[inline]
pub fn standard_complex(rng: &mut ChaCha8Rng) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re * std::f64::consts::FRAC_1_SQRT_2, im * std::f64::consts::FRAC_1_SQRT_2)
}

/// Fills `out` with i.i.d. CN(0, 1) entries.
#[inline]
pub fn fill_standard_complex(rng: &mut ChaCha8Rng, out: &mut [Complex64]) {
    for z in out.iter_mut() {
        *z = standard_complex(rng);
    }
}
