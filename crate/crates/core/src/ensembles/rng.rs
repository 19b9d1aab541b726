//! Counter-based random streams.
//!
//! Every matrix entry owns an independent stream keyed by
//! `(seed, trial, row, col)`; output `c` of a stream is a SplitMix64
//! finalizer applied to `key + (c + 1)·γ`. Nothing depends on the order in
//! which entries or trials are generated.

use rand_core::RngCore;

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;
const TRIAL_SALT: u64 = 0xd1b5_4a32_d192_ed03;
const ROW_SALT: u64 = 0xabc9_8388_fb8f_ac03;
const COL_SALT: u64 = 0x8cb9_2ba7_2f3d_8dd7;

#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CounterRng {
    key: u64,
    counter: u64,
}

impl CounterRng {
    pub fn from_key(key: u64) -> Self {
        Self { key, counter: 0 }
    }

    /// Stream for entry `(row, col)` of trial `trial`.
    pub fn for_entry(seed: u64, trial: u64, row: u64, col: u64) -> Self {
        let mut k = mix64(seed);
        k = mix64(k ^ trial.wrapping_mul(TRIAL_SALT));
        k = mix64(k ^ row.wrapping_mul(ROW_SALT));
        k = mix64(k ^ col.wrapping_mul(COL_SALT));
        Self::from_key(k)
    }

    /// Stream for an auxiliary object (e.g. a random subspace) identified by
    /// `tag`, disjoint in practice from the entry streams.
    pub fn for_tag(seed: u64, tag: u64) -> Self {
        Self::for_entry(seed, u64::MAX, tag, u64::MAX)
    }

    pub fn counter(&self) -> u64 {
        self.counter
    }

    /// Uniform on `[0, 1)` with 53 random bits.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

impl RngCore for CounterRng {
    #[inline]
    fn next_u32(&mut self) -> u32 {
        (self.next_u64() >> 32) as u32
    }

    #[inline]
    fn next_u64(&mut self) -> u64 {
        self.counter = self.counter.wrapping_add(1);
        mix64(self.key.wrapping_add(self.counter.wrapping_mul(GOLDEN)))
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        rand_core::impls::fill_bytes_via_next(self, dst)
    }
}
