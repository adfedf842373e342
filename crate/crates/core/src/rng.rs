//! Seeded, splittable randomness.
//!
//! Every random draw in the crate goes through a [`SeededRng`] built from a
//! 64-bit seed and a named substream, so each pipeline stage can be replayed
//! on its own.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Named substreams. Each kind owns a 2^48-wide range of stream ids.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stream {
    LanguageRows,
    Sampling,
    TrainInit,
    TrainShuffle,
    Perturbation,
    RandomSequences,
    Bootstrap,
}

impl Stream {
    fn tag(self) -> u64 {
        match self {
            Stream::LanguageRows => 1,
            Stream::Sampling => 2,
            Stream::TrainInit => 3,
            Stream::TrainShuffle => 4,
            Stream::Perturbation => 5,
            Stream::RandomSequences => 6,
            Stream::Bootstrap => 7,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SeededRng {
    seed: u64,
    stream: u64,
    inner: ChaCha8Rng,
}

impl SeededRng {
    /// Raw constructor from a seed and a stream id.
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        SeededRng {
            seed,
            stream,
            inner,
        }
    }

    /// Substream `index` of kind `kind`.
    pub fn substream(seed: u64, kind: Stream, index: u64) -> Self {
        debug_assert!(index < 1 << 48);
        Self::new(seed, (kind.tag() << 48) | (index & ((1 << 48) - 1)))
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// Uniform draw in the open interval (0, 1].
    pub fn open01(&mut self) -> f64 {
        1.0 - rand::Rng::random::<f64>(self)
    }
}

impl RngCore for SeededRng {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}
