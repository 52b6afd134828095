//! Reproducible random streams.
//!
//! A stream is a ChaCha8 keystream selected by `(seed, stream_id)`. Inside a
//! stream, every iteration `i` starts reading at word offset `i << 32`, so the
//! draws of iteration `i` do not depend on how many draws earlier iterations
//! consumed. Within an iteration, draws are consumed in a fixed order (edge
//! index, then direction), which pins every sample to its key.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        Self { seed, stream_id, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Repositions the stream at the start of iteration `i`'s block.
    pub fn begin_iteration(&mut self, i: u64) {
        self.rng.set_word_pos(u128::from(i) << 32);
    }

    /// A child stream, keyed by this stream's identity and `index`.
    pub fn fork(&self, index: u64) -> Self {
        let key = splitmix64(self.seed ^ splitmix64(self.stream_id.wrapping_add(0x9E37_79B9_7F4A_7C15)));
        Self::new(key, index)
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

pub(crate) fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
