//! Seedable counter-style pseudo-random generator used everywhere in this
//! crate.
//!
//! All stochastic components (samplers, data generators, Monte Carlo trials)
//! draw from [`SplitMix64`]. Given the same seed and the same draw order, the
//! stream is identical across runs and platforms, which is what makes trial
//! records and report files bitwise reproducible.

/// SplitMix64 generator: a 64-bit counter advanced by the golden-ratio
/// increment, finalized by an avalanching mix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitMix64 {
    state: u64,
}

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

/// The finalizer from SplitMix64. Bijective on `u64`.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        mix64(self.state)
    }

    /// Uniform draw in `[0, 1)` with 53 random bits.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform draw in `{0, 1, ..., n-1}` via the multiply-shift reduction.
    #[inline]
    pub fn next_below(&mut self, n: usize) -> usize {
        debug_assert!(n > 0);
        (((self.next_u64() as u128) * (n as u128)) >> 64) as usize
    }

    /// Standard normal draw by Box-Muller. Consumes exactly two uniforms per
    /// call so the draw order stays fixed.
    pub fn next_gaussian(&mut self) -> f64 {
        let u1 = loop {
            let u = self.next_f64();
            if u > 0.0 {
                break u;
            }
        };
        let u2 = self.next_f64();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }

    /// Index draw from an explicit probability vector (inverse CDF scan).
    pub fn next_categorical(&mut self, probs: &[f64]) -> usize {
        let u = self.next_f64();
        let mut acc = 0.0;
        for (i, p) in probs.iter().enumerate() {
            acc += p;
            if u < acc {
                return i;
            }
        }
        probs.len() - 1
    }

    /// Fisher-Yates shuffle of `0..n`.
    pub fn permutation(&mut self, n: usize) -> Vec<usize> {
        let mut p: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            let j = self.next_below(i + 1);
            p.swap(i, j);
        }
        p
    }
}

/// Per-trial seed derivation: `k -> mix(mix(master) + mix(k))`.
///
/// For a fixed master seed this is a composition of bijections in `k`, so
/// distinct trial indices always get distinct seeds.
#[inline]
pub fn derive_seed(master: u64, k: u64) -> u64 {
    mix64(mix64(master).wrapping_add(mix64(k)))
}
