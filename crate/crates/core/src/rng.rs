//! Seeded random streams.
//!
//! Every stochastic operation takes either a `u64` seed or an explicit
//! generator. Streams are ChaCha8 keyed by a seed, with the ChaCha stream id
//! selecting an independent substream, so `(seed, stream)` names a
//! reproducible sequence without any global state.

use rand::seq::SliceRandom;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Generator for substream `stream` of `seed`.
pub fn substream(seed: u64, stream: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Generator for the default stream of `seed`.
pub fn seeded(seed: u64) -> StreamRng {
    substream(seed, 0)
}

/// Derive a child seed from `(seed, stream)`; the first word of that substream.
pub fn child_seed(seed: u64, stream: u64) -> u64 {
    substream(seed, stream).next_u64()
}

/// Uniform permutation of `0..n` by Fisher-Yates.
pub fn random_permutation<R: rand::Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    perm
}
