//! Inputs shared by the benchmarks.

use framelab::{random, VectorSequence};

/// Seeded random frame of `len` vectors in `C^dim`.
pub fn random_frame(seed: u64, dim: usize, len: usize) -> VectorSequence {
    random::sequence(&mut random::rng(seed), dim, len)
}
