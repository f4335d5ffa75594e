//! Counter-based randomness.
//!
//! Every random choice is `ChaCha8(seed, stream)[counter]`: a call site takes
//! a fresh stream number in program order and indexes it by a logical
//! position (chunk number, core, trial). Results therefore depend only on the
//! seed and the order of calls, never on how work is spread over cores.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Debug)]
pub struct PemRng {
    seed: u64,
    next_stream: u64,
}

impl PemRng {
    pub fn new(seed: u64) -> Self {
        PemRng { seed, next_stream: 0 }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Hands out the next stream.
    pub fn stream(&mut self) -> Stream {
        let id = self.next_stream;
        self.next_stream += 1;
        Stream::new(self.seed, id)
    }
}

/// Random-access view of one ChaCha8 stream.
#[derive(Clone, Debug)]
pub struct Stream {
    rng: ChaCha8Rng,
}

impl Stream {
    pub fn new(seed: u64, id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(id);
        Stream { rng }
    }

    /// The `i`-th 64-bit output.
    pub fn at(&mut self, i: u64) -> u64 {
        self.rng.set_word_pos(2 * i as u128);
        self.rng.next_u64()
    }

    /// Uniform value in `[0, bound)` derived from output `i`.
    pub fn below(&mut self, i: u64, bound: u64) -> u64 {
        debug_assert!(bound > 0);
        ((self.at(i) as u128 * bound as u128) >> 64) as u64
    }
}
