//! Deterministic random streams.
//!
//! Every draw in an experiment comes from a ChaCha8 generator keyed by one
//! master seed; the stream id packs the scenario index and a purpose tag, so
//! two scenarios (or two uses inside one scenario) never share randomness and
//! results do not depend on how work is spread over threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u64)]
pub enum Purpose {
    Arrivals = 1,
    MidPrice = 2,
    Estimation = 3,
    Bootstrap = 4,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RngSpec {
    pub master_seed: u64,
}

impl RngSpec {
    pub fn new(master_seed: u64) -> Self {
        RngSpec { master_seed }
    }

    /// Generator for `(scenario, purpose)`. Scenario indices must fit in 56 bits.
    pub fn stream(&self, scenario: u64, purpose: Purpose) -> ChaCha8Rng {
        assert!(scenario < 1 << 56, "scenario index {scenario} out of range");
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream((scenario << 8) | purpose as u64);
        rng
    }
}
