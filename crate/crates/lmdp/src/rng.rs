//! Project-wide random source.
//!
//! Every stochastic routine in this crate draws from ChaCha8 (`rand_chacha`),
//! seeded from a 64-bit run seed. Routines that fan out over episodes or
//! seeds derive one independent substream per unit of work via
//! [`substream`], which expands `(seed, stream)` into a fresh 256-bit ChaCha
//! key with SplitMix64. Results are therefore reproducible across machines
//! and identical whether the work runs sequentially or on a thread pool.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The generator used everywhere in this crate.
pub type RunRng = ChaCha8Rng;

/// RNG for a whole run.
pub fn rng_from_seed(seed: u64) -> RunRng {
    RunRng::seed_from_u64(seed)
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Independent substream `stream` of the run seeded with `seed`.
///
/// The schedule-independence of parallel fan-out rests on this: episode `i`
/// always sees `substream(seed, i)` no matter which thread runs it.
pub fn substream(seed: u64, stream: u64) -> RunRng {
    let mut state = seed ^ 0x6a09_e667_f3bc_c908u64.wrapping_mul(stream.wrapping_add(1));
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    RunRng::from_seed(key)
}

/// Draw an index from a discrete distribution given as a probability slice.
///
/// The slice is assumed to sum to one up to rounding; any residual mass
/// falls on the last index.
pub fn sample_index<R: rand::Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs.len() - 1
}
