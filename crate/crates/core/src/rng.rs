//! Counter-based deterministic random numbers.
//!
//! The generator is the SplitMix64 sequence evaluated as a pure function of
//! `(seed, counter)`. Output `i` depends only on those two integers, so trial
//! blocks can be drawn independently over disjoint counter ranges and the
//! stream is bit-identical across platforms.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 stream addressed by counter.
#[derive(Debug, Clone, Copy)]
pub struct CounterRng {
    seed: u64,
    counter: u64,
}

impl CounterRng {
    pub fn new(seed: u64) -> Self {
        Self { seed, counter: 0 }
    }

    /// Output at an absolute stream position, independent of internal state.
    pub fn at(seed: u64, index: u64) -> u64 {
        let mut z = seed.wrapping_add(index.wrapping_add(1).wrapping_mul(GOLDEN));
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    pub fn next_u64(&mut self) -> u64 {
        let out = Self::at(self.seed, self.counter);
        self.counter += 1;
        out
    }

    /// Uniform double in `[0, 1)` with 53 random bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform double in `(lo, hi)`.
    pub fn next_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }
}
