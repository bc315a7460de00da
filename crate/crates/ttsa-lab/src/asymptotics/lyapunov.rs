//! Hurwitz checks, the Lyapunov equation `K V + V Kᵀ + U = 0`, and the
//! Loewner comparison used by efficiency ordering.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Strict Hurwitz tolerance: every eigenvalue must have real part below this.
pub const HURWITZ_TOL: f64 = -1e-12;

/// Returns (is_hurwitz, max real part of the spectrum).
pub fn hurwitz_check(m: &DMatrix<f64>) -> Result<(bool, f64)> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            context: "hurwitz_check input".into(),
        });
    }
    let eigs = m.complex_eigenvalues();
    let max_re = eigs.iter().map(|e| e.re).fold(f64::NEG_INFINITY, f64::max);
    Ok((max_re < HURWITZ_TOL, max_re))
}

/// Error if `m` is not Hurwitz, naming it in the message.
pub fn require_hurwitz(m: &DMatrix<f64>, name: &str) -> Result<()> {
    let (ok, max_re) = hurwitz_check(m)?;
    if !ok {
        return Err(Error::NotHurwitz {
            matrix: name.to_string(),
            max_real_part: max_re,
        });
    }
    Ok(())
}

/// Solve `K V + V Kᵀ + U = 0` for Hurwitz `K` and symmetric PSD `U` by
/// vectorizing through the Kronecker identity
/// `(I ⊗ K + K ⊗ I) vec(V) = -vec(U)` and a dense LU on the d² system.
pub fn lyapunov_solve(k: &DMatrix<f64>, u: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let d = k.nrows();
    if u.nrows() != d || u.ncols() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: u.nrows(),
        });
    }
    require_hurwitz(k, "K")?;

    let eye = DMatrix::identity(d, d);
    let system = kron(&eye, k) + kron(k, &eye);
    let rhs = nalgebra::DVector::from_fn(d * d, |idx, _| -u[(idx % d, idx / d)]);
    let lu = system.lu();
    let sol = lu.solve(&rhs).ok_or(Error::IllConditioned {
        context: "vectorized Lyapunov system",
        cond: f64::INFINITY,
    })?;
    let mut v = DMatrix::from_fn(d, d, |i, j| sol[j * d + i]);
    v = 0.5 * (&v + v.transpose());

    let residual = (k * &v + &v * k.transpose() + u).norm();
    let bound = 1e-10 * (1.0 + u.norm());
    if residual > bound {
        return Err(Error::IllConditioned {
            context: "Lyapunov residual beyond tolerance",
            cond: residual / bound,
        });
    }
    Ok(v)
}

/// Loewner test `A <=_L B`: min eigenvalue of `B - A` is at least `-tol`.
pub fn loewner_leq(a: &DMatrix<f64>, b: &DMatrix<f64>, tol: f64) -> Result<bool> {
    if a.nrows() != b.nrows() || a.ncols() != b.ncols() || a.nrows() != a.ncols() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows(),
            found: b.nrows(),
        });
    }
    let diff = b - a;
    let sym = 0.5 * (&diff + diff.transpose());
    let min_eig = sym
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    Ok(min_eig >= -tol)
}

pub(crate) fn kron(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    DMatrix::from_fn(ar * br, ac * bc, |i, j| a[(i / br, j / bc)] * b[(i % br, j % bc)])
}
