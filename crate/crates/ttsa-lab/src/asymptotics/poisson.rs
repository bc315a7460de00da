//! Poisson equation on finite chains and the closed-form long-run covariance
//! of partial sums.
//!
//! For an irreducible kernel `P` with stationary `pi`, the fundamental matrix
//! `Z = (I - P + 1 piᵀ)⁻¹` turns any per-state function `h` into the Poisson
//! solution `m = Z h` with `m - P m = h - h̄`. The long-run covariance of
//! partial sums of a centered `g` is then the stationary mean of the one-step
//! conditional covariance of `m`:
//!
//! `U = Σ_i pi_i [ Σ_j P(i,j) m̃_j m̃_jᵀ - (Pm̃)_i (Pm̃)_iᵀ ]`,  `m̃ = Z (g - ḡ)`.

use nalgebra::{DMatrix, DVector};

use crate::chains::FiniteChain;
use crate::error::{Error, Result};

/// Solve the Poisson equation `m - Pm = h - h̄` columnwise; `h` is m x d
/// (one row per state).
pub fn poisson_solve(chain: &FiniteChain, h: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let m = chain.n_states();
    if h.nrows() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: h.nrows(),
        });
    }
    if h.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            context: "poisson_solve input".into(),
        });
    }
    let p = chain.transition_matrix();
    let pi = chain.stationary_vector();
    let ones = DVector::from_element(m, 1.0);
    let fundamental = DMatrix::identity(m, m) - p + &ones * pi.transpose();
    let lu = fundamental.lu();
    lu.solve(h).ok_or(Error::IllConditioned {
        context: "poisson fundamental matrix (chain not irreducible?)",
        cond: f64::INFINITY,
    })
}

/// Scalar-valued convenience wrapper.
pub fn poisson_solve_vec(chain: &FiniteChain, h: &[f64]) -> Result<Vec<f64>> {
    let hm = DMatrix::from_fn(h.len(), 1, |i, _| h[i]);
    Ok(poisson_solve(chain, &hm)?.column(0).iter().copied().collect())
}

/// Closed-form long-run covariance `U` of partial sums of `g - ḡ` along the
/// chain; `g` is m x d. Handles irreducible chains directly; reducible chains
/// are decomposed into closed classes (the limit exists only when every class
/// shares the global mean, otherwise the covariance diverges and an error is
/// returned).
pub fn sampling_cov_closed(chain: &FiniteChain, g: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let m = chain.n_states();
    let d = g.ncols();
    if g.nrows() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: g.nrows(),
        });
    }
    if g.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            context: "sampling_cov_closed input".into(),
        });
    }
    let pi = chain.stationary_vector();
    let gbar = g.transpose() * pi; // d-vector
    let centered = {
        let mut c = g.clone();
        for i in 0..m {
            for k in 0..d {
                c[(i, k)] -= gbar[k];
            }
        }
        c
    };

    if chain.is_irreducible() {
        return cov_of_centered(chain, &centered);
    }

    // reducible: weight the per-class covariances by the class masses
    let classes = chain.closed_classes();
    let closed_mass: f64 = classes
        .iter()
        .flat_map(|c| c.iter())
        .map(|&i| pi[i])
        .sum();
    if (closed_mass - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidProbability {
            reason: "stationary vector puts mass on transient states".into(),
        });
    }
    let mut max_dev: f64 = 0.0;
    let mut total = DMatrix::zeros(d, d);
    let scale = 1.0 + centered.amax();
    for class in &classes {
        let (sub, weight) = chain.restrict(class)?;
        let sub_g = DMatrix::from_fn(class.len(), d, |a, k| centered[(class[a], k)]);
        // the class mean must agree with the global mean (zero after centering)
        let class_mean = sub_g.transpose() * sub.stationary_vector();
        max_dev = max_dev.max(class_mean.amax());
        total += weight * cov_of_centered(&sub, &sub_g)?;
    }
    if max_dev > 1e-9 * scale {
        return Err(Error::DivergentCovariance { deviation: max_dev });
    }
    Ok(total)
}

fn cov_of_centered(chain: &FiniteChain, centered: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let p = chain.transition_matrix();
    let pi = chain.stationary_vector();
    let mt = poisson_solve(chain, centered)?;
    let pm = p * &mt;
    // U = Σ_j pi_j m̃_j m̃_jᵀ - Σ_i pi_i (Pm̃)_i (Pm̃)_iᵀ  (first term uses
    // stationarity of pi to collapse the double sum)
    let d = centered.ncols();
    let mut u = DMatrix::zeros(d, d);
    for i in 0..chain.n_states() {
        let mrow = mt.row(i).transpose();
        let prow = pm.row(i).transpose();
        u += pi[i] * (&mrow * mrow.transpose() - &prow * prow.transpose());
    }
    // symmetrize rounding noise away
    Ok(0.5 * (&u + u.transpose()))
}

/// Max residual of the Poisson identity `m - Pm = h - h̄` columnwise.
pub fn poisson_residual(chain: &FiniteChain, h: &DMatrix<f64>, m_sol: &DMatrix<f64>) -> f64 {
    let p = chain.transition_matrix();
    let pi = chain.stationary_vector();
    let hbar = h.transpose() * pi;
    let lhs = m_sol - p * m_sol;
    let mut worst: f64 = 0.0;
    for i in 0..h.nrows() {
        for k in 0..h.ncols() {
            worst = worst.max((lhs[(i, k)] - (h[(i, k)] - hbar[k])).abs());
        }
    }
    worst
}
