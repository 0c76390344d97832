//! Counter-based random streams and order-independent parallel reduction.
//!
//! Every random draw in an experiment comes from a ChaCha8 stream whose key
//! is derived from `(seed, tag)` and whose 64-bit stream id is the trial
//! index. A trial therefore sees the same numbers no matter which worker
//! runs it or in what order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Generator family and pinned version recorded in run reports.
pub const GENERATOR: &str = "chacha8 (rand_chacha 0.9.0, rand 0.9.5); key = splitmix64(seed, fnv1a(tag)), stream = trial index";

/// Trials per reduction block. Part of the reproducibility contract: float
/// sums are accumulated block by block in index order.
pub const BLOCK_TRIALS: u64 = 4096;

pub type TrialRng = ChaCha8Rng;

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Keyed family of independent streams for one `(seed, tag)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StreamFamily {
    key: [u8; 32],
}

impl StreamFamily {
    pub fn new(seed: u64, tag: &str) -> Self {
        let mut state = seed ^ fnv1a(tag.as_bytes()).rotate_left(17);
        let mut key = [0u8; 32];
        for chunk in key.chunks_exact_mut(8) {
            chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
        }
        StreamFamily { key }
    }

    /// The stream for trial `index`.
    pub fn stream(&self, index: u64) -> TrialRng {
        let mut rng = ChaCha8Rng::from_seed(self.key);
        rng.set_stream(index);
        rng
    }
}

/// Folds `step` over `0..trials` in fixed-size blocks run in parallel on the
/// current rayon pool, then merges block results in index order.
///
/// The result is bit-identical for every pool size.
pub fn fold_trials<A, I, S, M>(trials: u64, init: I, step: S, merge: M) -> A
where
    A: Send,
    I: Fn() -> A + Sync + Send,
    S: Fn(&mut A, u64) + Sync + Send,
    M: Fn(&mut A, A),
{
    let blocks = trials.div_ceil(BLOCK_TRIALS);
    let partials: Vec<A> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut acc = init();
            let end = ((b + 1) * BLOCK_TRIALS).min(trials);
            for i in b * BLOCK_TRIALS..end {
                step(&mut acc, i);
            }
            acc
        })
        .collect();
    let mut total = init();
    for p in partials {
        merge(&mut total, p);
    }
    total
}
