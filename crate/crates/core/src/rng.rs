//! Reproducible random substreams.
//!
//! Every stream is ChaCha8 keyed by `seed` (expanded with `SeedableRng::seed_from_u64`)
//! with its 64-bit stream word set to `stream_id`. ChaCha is counter based, so a
//! `(seed, stream_id)` pair yields the same draws on every platform.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngStream {
    pub seed: u64,
    pub stream_id: u64,
}

impl RngStream {
    pub const fn new(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }
}
