//! Counter-based random streams.
//!
//! Every draw is a pure function of `(master_seed, stream_id, trial, word)`:
//! the ChaCha key is derived from the seed pair, the ChaCha stream selects the
//! trial and the word position selects the draw. Trials can therefore be
//! evaluated in any order, on any number of workers, with identical results.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

/// Seed pair identifying a family of independent trial streams.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SeedSpec {
    pub master_seed: u64,
    pub stream_id: u64,
}

/// Substream tags. Callers that must share realizations (common random
/// numbers) use the same tag; unrelated consumers use distinct tags.
pub mod tags {
    pub const REALIZATION: u64 = 0x01;
    pub const VERTEX_SEED: u64 = 0x02;
    pub const CANDIDATES: u64 = 0x03;
    pub const MATCHING_GRAPH: u64 = 0x04;
    pub const MATCHING_CHOICE: u64 = 0x05;
    pub const GENERATOR: u64 = 0x06;
    pub const TAIL: u64 = 0x07;
    pub const QUERY_PHASE: u64 = 0x08;
    pub const F_STAR: u64 = 0x09;
}

const STREAM_MIX: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(STREAM_MIX);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl SeedSpec {
    pub fn new(master_seed: u64) -> Self {
        SeedSpec {
            master_seed,
            stream_id: 0,
        }
    }

    pub fn with_stream(master_seed: u64, stream_id: u64) -> Self {
        SeedSpec {
            master_seed,
            stream_id,
        }
    }

    /// A stream derived from this one, independent of it and of other tags.
    pub fn substream(&self, tag: u64) -> SeedSpec {
        SeedSpec {
            master_seed: self.master_seed,
            stream_id: splitmix(self.stream_id ^ splitmix(tag)),
        }
    }

    /// Generator positioned at the first draw of `trial`.
    pub fn trial_rng(&self, trial: u64) -> TrialRng {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&self.master_seed.to_le_bytes());
        key[8..16].copy_from_slice(&self.stream_id.to_le_bytes());
        key[16..24].copy_from_slice(&splitmix(self.master_seed).to_le_bytes());
        key[24..].copy_from_slice(&splitmix(self.stream_id).to_le_bytes());
        let mut inner = ChaCha8Rng::from_seed(key);
        inner.set_stream(trial);
        TrialRng { inner }
    }
}

/// Draw source for a single trial.
pub struct TrialRng {
    inner: ChaCha8Rng,
}

impl TrialRng {
    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform in `[0, 1)` with 53 bits of precision.
    pub fn next_f64(&mut self) -> f64 {
        (self.inner.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// `true` with probability `p`; always `true` at `p = 1`.
    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.next_f64() < p
    }

    /// Uniform index in `0..k`. `k` must be positive.
    pub fn index(&mut self, k: usize) -> usize {
        let i = (self.next_f64() * k as f64) as usize;
        i.min(k - 1)
    }

    /// Jumps to the `i`-th 64-bit draw of this trial.
    pub fn seek(&mut self, i: u64) {
        self.inner.set_word_pos(2 * i as u128);
    }
}
