//! SplitMix64, the generator behind every seeded draw in this crate.
//!
//! The generator is a counter: the k-th output is `mix(seed + k * GOLDEN_GAMMA)`
//! with the constants below, so a seed names the same stream in any
//! implementation. Doubles take the top 53 bits: `(x >> 11) * 2^-53`.

pub const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;
const MIX_MUL_1: u64 = 0xBF58_476D_1CE4_E5B9;
const MIX_MUL_2: u64 = 0x94D0_49BB_1331_11EB;

/// The SplitMix64 output function.
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(MIX_MUL_1);
    z = (z ^ (z >> 27)).wrapping_mul(MIX_MUL_2);
    z ^ (z >> 31)
}

#[derive(Clone, Debug)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        mix64(self.state)
    }

    /// Uniform on [0, 1).
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on `0..bound` by multiply-shift (`bound > 0`).
    pub fn next_below(&mut self, bound: u64) -> u64 {
        ((self.next_u64() as u128 * bound as u128) >> 64) as u64
    }

    /// Fisher-Yates, drawing `next_below(i + 1)` for `i` from the top down.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.next_below(i as u64 + 1) as usize;
            items.swap(i, j);
        }
    }
}

/// Derives a child seed from a base seed and a path of stream tags.
///
/// `h = base; for t in tags { h = mix64(h ^ mix64(t + GOLDEN_GAMMA)) }`
pub fn derive_seed(base: u64, tags: &[u64]) -> u64 {
    tags.iter().fold(base, |h, &t| {
        mix64(h ^ mix64(t.wrapping_add(GOLDEN_GAMMA)))
    })
}
