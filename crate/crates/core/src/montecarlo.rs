//! Seeded Monte Carlo engine.
//!
//! Replicate `i` of a run with master seed `s` draws from the ChaCha8 stream
//! seeded by `s` and positioned on stream number `i`. Streams never overlap,
//! so a replicate's draws are fixed by `(s, i)` alone and parallel and serial
//! execution produce the same values. Results are collected in replicate
//! order before any reduction.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub type ReplicateRng = ChaCha8Rng;

/// The generator for replicate `index` under `master`.
pub fn replicate_rng(master: u64, index: u64) -> ReplicateRng {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(index);
    rng
}

/// Derives an independent master seed for a named sub-experiment (for
/// example the H0 and H1 halves of an error-rate estimate).
pub fn child_seed(master: u64, tag: u64) -> u64 {
    splitmix64(master ^ splitmix64(tag.wrapping_add(0x9E37_79B9_7F4A_7C15)))
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Runs `reps` replicates in parallel and returns their outputs in replicate
/// order.
pub fn replicate<T, F>(master: u64, reps: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut ReplicateRng, usize) -> T + Sync,
{
    (0..reps)
        .into_par_iter()
        .map(|i| {
            let mut rng = replicate_rng(master, i as u64);
            f(&mut rng, i)
        })
        .collect()
}
