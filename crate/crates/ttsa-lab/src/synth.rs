//! Seeded synthetic inputs: random ergodic chains, Hurwitz matrices, and PSD
//! matrices at desk scale. Used by the verification suites and the examples.

use nalgebra::DMatrix;

use crate::chains::FiniteChain;
use crate::rng::SplitMix64;

/// Random ergodic chain on `m` states: exponential weights plus a small
/// floor on every entry, rows normalized. The floor guarantees strong
/// connectivity and aperiodicity.
pub fn random_ergodic_chain(m: usize, seed: u64) -> FiniteChain {
    let mut rng = SplitMix64::new(seed);
    let mut p = DMatrix::zeros(m, m);
    for i in 0..m {
        let mut row: Vec<f64> = (0..m).map(|_| 0.02 + rng.next_f64()).collect();
        // sparsify a little while keeping the floor
        for v in row.iter_mut() {
            if rng.next_f64() < 0.3 {
                *v = 0.02;
            }
        }
        let sum: f64 = row.iter().sum();
        for j in 0..m {
            p[(i, j)] = row[j] / sum;
        }
        // exact row-stochastic normalization
        let s: f64 = (0..m).map(|j| p[(i, j)]).sum();
        p[(i, m - 1)] += 1.0 - s;
    }
    FiniteChain::new(p).expect("floored random kernel is ergodic")
}

/// Random Hurwitz matrix: a random matrix shifted left of the imaginary axis
/// by its spectral abscissa plus a margin in [0.2, 1.2).
pub fn random_hurwitz(d: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = SplitMix64::new(seed);
    let m = DMatrix::from_fn(d, d, |_, _| rng.next_gaussian());
    let eigs = m.complex_eigenvalues();
    let max_re = eigs.iter().map(|e| e.re).fold(f64::NEG_INFINITY, f64::max);
    let margin = 0.2 + rng.next_f64();
    m - DMatrix::identity(d, d) * (max_re + margin)
}

/// Random symmetric positive semi-definite matrix `G Gᵀ` with occasional
/// rank deficiency.
pub fn random_psd(d: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = SplitMix64::new(seed);
    let rank = if rng.next_f64() < 0.25 && d > 1 {
        1 + rng.next_below(d - 1)
    } else {
        d
    };
    let g = DMatrix::from_fn(d, rank, |_, _| rng.next_gaussian());
    let m = &g * g.transpose();
    // symmetrize away rounding
    0.5 * (&m + m.transpose())
}

/// Random vector-valued per-state function as an m x d matrix.
pub fn random_state_function(m: usize, d: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = SplitMix64::new(seed);
    DMatrix::from_fn(m, d, |_, _| rng.next_gaussian())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_chain_is_ergodic_for_many_seeds() {
        for seed in 0..50 {
            let c = random_ergodic_chain(2 + (seed as usize % 19), seed);
            assert!(c.is_irreducible());
        }
    }

    #[test]
    fn random_hurwitz_is_hurwitz() {
        for seed in 0..30 {
            let k = random_hurwitz(1 + (seed as usize % 8), seed);
            let max_re = k
                .complex_eigenvalues()
                .iter()
                .map(|e| e.re)
                .fold(f64::NEG_INFINITY, f64::max);
            assert!(max_re < -0.1, "seed {seed}: max re {max_re}");
        }
    }

    #[test]
    fn random_psd_has_nonnegative_spectrum() {
        for seed in 0..30 {
            let u = random_psd(1 + (seed as usize % 8), seed);
            let min_eig = u
                .clone()
                .symmetric_eigen()
                .eigenvalues
                .iter()
                .copied()
                .fold(f64::INFINITY, f64::min);
            assert!(min_eig >= -1e-10);
        }
    }
}
