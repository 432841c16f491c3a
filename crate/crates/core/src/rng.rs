//! Seeded, splittable random streams.
//!
//! Every generator is keyed by `(master_seed, stream_id, lane)`. Data matrices
//! use one lane per column, Monte Carlo estimators one lane per replicate, so
//! any value can be recomputed without replaying unrelated draws and results
//! never depend on how work is scheduled across threads.

use rand::SeedableRng;
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::{Deserialize, Serialize};

pub type StreamRng = Xoshiro256PlusPlus;

/// Identifies one reproducible random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeedSpec {
    pub master_seed: u64,
    pub stream_id: u64,
}

impl SeedSpec {
    pub const fn new(master_seed: u64, stream_id: u64) -> Self {
        Self {
            master_seed,
            stream_id,
        }
    }

    /// Generator for one lane (column or replicate) of this stream.
    pub fn lane(&self, lane: u64) -> StreamRng {
        StreamRng::seed_from_u64(mix_key(self.master_seed, self.stream_id, lane))
    }
}

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn mix_key(master: u64, stream: u64, lane: u64) -> u64 {
    let h = splitmix64(master);
    let h = splitmix64(h ^ splitmix64(stream.wrapping_add(0x243F_6A88_85A3_08D3)));
    splitmix64(h ^ splitmix64(lane.wrapping_add(0x1319_8A2E_0370_7344)))
}
