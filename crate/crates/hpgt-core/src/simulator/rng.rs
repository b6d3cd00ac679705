//! Counter-based randomness with one substream per trial.
//!
//! The generator is ChaCha8. A run is identified by a 64-bit seed; trial
//! `t` draws from the stream with id `t` of that seed. Substreams are
//! independent by construction, so trials can be simulated in any order,
//! serially or in parallel, and produce identical results bit for bit.
//!
//! Within a trial the draw order is fixed: the state, then the maximizer's
//! private initialization, then the minimizer's, then per stage one draw
//! for the maximizer's action followed by one for the minimizer's.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Debug)]
pub struct TrialRng {
    rng: ChaCha8Rng,
}

impl TrialRng {
    pub fn new(seed: u64, trial: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(trial);
        TrialRng { rng }
    }

    /// Uniform in [0, 1) with 53 random bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Samples an index from a probability vector by inverse CDF.
    /// Rounding shortfall lands on the last index.
    pub fn sample_weights(&mut self, weights: &[f64]) -> usize {
        debug_assert!(!weights.is_empty());
        let r = self.next_f64();
        let mut acc = 0.0;
        for (i, &w) in weights.iter().enumerate() {
            acc += w;
            if r < acc {
                return i;
            }
        }
        weights.len() - 1
    }

    pub fn sample_uniform_index(&mut self, n: usize) -> usize {
        debug_assert!(n > 0);
        ((self.next_f64() * n as f64) as usize).min(n - 1)
    }
}
