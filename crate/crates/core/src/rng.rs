//! SplitMix64: a counter-friendly, splittable 64-bit generator.
//!
//! Every replicate (Monte Carlo sign vector, synthetic sample) derives its
//! own independent stream from a root seed and an integer key path, so
//! results are a pure function of `(seed, keys)` and independent of thread
//! count and execution order.

/// One mixing step of SplitMix64 (Steele, Lea & Flood's finalizer).
#[inline]
pub fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A SplitMix64 stream.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    /// Derives an independent stream from a root seed and a key path,
    /// e.g. `(seed, [n, replicate_index])`.
    pub fn derive(seed: u64, keys: &[u64]) -> Self {
        let mut state = seed;
        splitmix64(&mut state);
        for &k in keys {
            state ^= k.wrapping_mul(0xD6E8_FEB8_6659_FD93);
            splitmix64(&mut state);
        }
        SplitMix64 { state }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        splitmix64(&mut self.state)
    }

    /// Uniform in [0, 1) with 53 random bits.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in (0, 1]; safe as a log argument.
    #[inline]
    pub fn next_f64_open(&mut self) -> f64 {
        1.0 - self.next_f64()
    }

    /// Fair sign: +1.0 or -1.0.
    #[inline]
    pub fn next_sign(&mut self) -> f64 {
        if self.next_u64() & 1 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    /// Standard normal via Box-Muller (both uniforms consumed every call,
    /// no state carried between calls).
    pub fn next_normal(&mut self) -> f64 {
        let u1 = self.next_f64_open();
        let u2 = self.next_f64();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }
}
