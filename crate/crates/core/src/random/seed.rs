//! Reproducible, parallel-safe random streams.
//!
//! A `SeedSpec` names one stream of a counter-based generator: the master
//! seed keys the cipher, the stream id selects an independent ChaCha stream.
//! Draws are a pure function of the pair, so trials keyed by distinct stream
//! ids can run in any order, on any number of workers, with identical output.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeedSpec {
    pub master_seed: u64,
    pub stream_id: u64,
}

impl SeedSpec {
    pub fn new(master_seed: u64, stream_id: u64) -> Self {
        SeedSpec {
            master_seed,
            stream_id,
        }
    }

    pub fn with_stream(self, stream_id: u64) -> Self {
        SeedSpec {
            master_seed: self.master_seed,
            stream_id,
        }
    }

    /// The generator for this stream.
    pub fn rng(&self) -> ChaCha12Rng {
        let mut state = self.master_seed;
        let mut seed = [0u8; 32];
        for chunk in seed.chunks_exact_mut(8) {
            chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
        }
        let mut rng = ChaCha12Rng::from_seed(seed);
        rng.set_stream(self.stream_id.into());
        rng
    }
}

/// SplitMix64 step, used only to expand the master seed into key material.
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
