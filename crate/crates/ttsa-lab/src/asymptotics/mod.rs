//! Every quantity the central limit theorem attaches to a TTSA instance, in
//! closed form on finite chains: Jacobian blocks of the mean fields, sampling
//! covariances, the reduced slow-timescale matrices
//!
//! ```text
//! K_x = Q11 - Q12 Q22⁻¹ Q21
//! U_x = [I  -Q12 Q22⁻¹] [U11 U12; U21 U22] [I  -Q12 Q22⁻¹]ᵀ
//! ```
//!
//! and the limiting covariances solving the Lyapunov equations
//! `(K_x + shift) V_x + V_x (K_x + shift)ᵀ + U_x = 0` (with the
//! half-identity shift exactly when b = 1) and `Q22 V_y + V_y Q22ᵀ + U22 = 0`.

mod jacobian;
mod lyapunov;
mod montecarlo;
mod poisson;

pub use jacobian::{default_fd_step, jacobian_blocks};
pub use lyapunov::{hurwitz_check, loewner_leq, lyapunov_solve, require_hurwitz, HURWITZ_TOL};
pub use montecarlo::{sampling_cov_mc, McCovariance, McOptions};
pub use poisson::{poisson_residual, poisson_solve, poisson_solve_vec, sampling_cov_closed};

use nalgebra::{DMatrix, DVector};

use crate::chains::FiniteChain;
use crate::error::{Error, Result};
use crate::ttsa::{DriftPair, StepSchedule};

/// Jacobians of the two mean fields at the equilibrium.
#[derive(Debug, Clone, PartialEq)]
pub struct JacobianBlocks {
    pub q11: DMatrix<f64>,
    pub q12: DMatrix<f64>,
    pub q21: DMatrix<f64>,
    pub q22: DMatrix<f64>,
}

/// Long-run covariance blocks of the stacked drift at the equilibrium.
#[derive(Debug, Clone, PartialEq)]
pub struct CovBlocks {
    pub u11: DMatrix<f64>,
    pub u12: DMatrix<f64>,
    pub u21: DMatrix<f64>,
    pub u22: DMatrix<f64>,
}

impl CovBlocks {
    pub fn d1(&self) -> usize {
        self.u11.nrows()
    }

    pub fn d2(&self) -> usize {
        self.u22.nrows()
    }

    /// Assemble the (d1+d2) x (d1+d2) stacked matrix.
    pub fn stacked(&self) -> DMatrix<f64> {
        let (d1, d2) = (self.d1(), self.d2());
        let mut s = DMatrix::zeros(d1 + d2, d1 + d2);
        s.view_mut((0, 0), (d1, d1)).copy_from(&self.u11);
        s.view_mut((0, d1), (d1, d2)).copy_from(&self.u12);
        s.view_mut((d1, 0), (d2, d1)).copy_from(&self.u21);
        s.view_mut((d1, d1), (d2, d2)).copy_from(&self.u22);
        s
    }

    pub fn from_stacked(s: &DMatrix<f64>, d1: usize) -> Self {
        let d2 = s.nrows() - d1;
        CovBlocks {
            u11: s.view((0, 0), (d1, d1)).into(),
            u12: s.view((0, d1), (d1, d2)).into(),
            u21: s.view((d1, 0), (d2, d1)).into(),
            u22: s.view((d1, d1), (d2, d2)).into(),
        }
    }

    /// Check `U12 = U21ᵀ` and positive semi-definiteness of the stacked
    /// matrix within `1e-9` (relative to its scale).
    pub fn validate(&self) -> Result<()> {
        let sym_gap = (&self.u12 - self.u21.transpose()).amax();
        let scale = 1.0 + self.stacked().amax();
        if sym_gap > 1e-9 * scale {
            return Err(Error::NonFinite {
                context: format!("cov blocks violate U12 = U21ᵀ (gap {sym_gap:.3e})"),
            });
        }
        let stacked = self.stacked();
        let sym = 0.5 * (&stacked + stacked.transpose());
        let min_eig = sym
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        if min_eig < -1e-9 * scale {
            return Err(Error::NonFinite {
                context: format!("stacked cov blocks not PSD (min eig {min_eig:.3e})"),
            });
        }
        Ok(())
    }
}

/// `K_x = Q11 - Q12 Q22⁻¹ Q21`. Errors when Q22 is numerically singular
/// (condition number above 1e12).
pub fn k_x(blocks: &JacobianBlocks) -> Result<DMatrix<f64>> {
    let inv_q21 = solve_q22(blocks, &blocks.q21)?;
    Ok(&blocks.q11 - &blocks.q12 * inv_q21)
}

/// `U_x = [I, -Q12 Q22⁻¹] U [I, -Q12 Q22⁻¹]ᵀ`, the slow-timescale noise
/// covariance after eliminating the fast iterates.
pub fn u_x(blocks: &JacobianBlocks, covs: &CovBlocks) -> Result<DMatrix<f64>> {
    let d1 = blocks.q11.nrows();
    let d2 = blocks.q22.nrows();
    // C = [I, -Q12 Q22⁻¹] as a d1 x (d1+d2) matrix
    let q22_inv_t = solve_q22(blocks, &DMatrix::identity(d2, d2))?;
    let right = -&blocks.q12 * q22_inv_t;
    let mut c = DMatrix::zeros(d1, d1 + d2);
    c.view_mut((0, 0), (d1, d1)).copy_from(&DMatrix::identity(d1, d1));
    c.view_mut((0, d1), (d1, d2)).copy_from(&right);
    let u = &c * covs.stacked() * c.transpose();
    Ok(0.5 * (&u + u.transpose()))
}

fn solve_q22(blocks: &JacobianBlocks, rhs: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let svd = blocks.q22.clone().svd(false, false);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let cond = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if !cond.is_finite() || cond > 1e12 {
        return Err(Error::IllConditioned {
            context: "Q22",
            cond,
        });
    }
    blocks
        .q22
        .clone()
        .lu()
        .solve(rhs)
        .ok_or(Error::IllConditioned {
            context: "Q22",
            cond: f64::INFINITY,
        })
}

/// Solve the two Lyapunov equations of the CLT. The slow equation receives
/// the half-identity shift exactly when the schedule sits at b = 1; the fast
/// equation never does, since a < 1 by construction.
pub fn limiting_covariances(
    blocks: &JacobianBlocks,
    covs: &CovBlocks,
    schedule: &StepSchedule,
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let kx = k_x(blocks)?;
    let ux = u_x(blocks, covs)?;
    let d1 = kx.nrows();
    let shifted = if schedule.slow_boundary() {
        &kx + 0.5 * DMatrix::identity(d1, d1)
    } else {
        kx
    };
    require_hurwitz(&shifted, if schedule.slow_boundary() { "K_x + I/2" } else { "K_x" })?;
    require_hurwitz(&blocks.q22, "Q22")?;
    let v_x = lyapunov_solve(&shifted, &ux)?;
    let v_y = lyapunov_solve(&blocks.q22, &covs.u22)?;
    Ok((v_x, v_y))
}

/// The full bundle of CLT quantities at an equilibrium.
#[derive(Debug, Clone)]
pub struct AsymptoticModel {
    pub blocks: JacobianBlocks,
    pub covs: CovBlocks,
    pub k_x: DMatrix<f64>,
    pub u_x: DMatrix<f64>,
    pub v_x: DMatrix<f64>,
    pub v_y: DMatrix<f64>,
    pub b: f64,
}

impl AsymptoticModel {
    pub fn assemble(
        blocks: JacobianBlocks,
        covs: CovBlocks,
        schedule: &StepSchedule,
    ) -> Result<Self> {
        covs.validate()?;
        let kx = k_x(&blocks)?;
        let ux = u_x(&blocks, &covs)?;
        let (v_x, v_y) = limiting_covariances(&blocks, &covs, schedule)?;
        Ok(AsymptoticModel {
            blocks,
            covs,
            k_x: kx,
            u_x: ux,
            v_x,
            v_y,
            b: schedule.b(),
        })
    }

    pub fn trace_v_x(&self) -> f64 {
        self.v_x.trace()
    }

    pub fn trace_v_y(&self) -> f64 {
        self.v_y.trace()
    }
}

/// Closed-form covariance blocks of the (reweighted) drift pair at the
/// equilibrium, computed on `chain` with `observe` mapping chain states to
/// drift noise states.
pub fn cov_blocks_closed(
    chain: &FiniteChain,
    observe: &[usize],
    drift: &DriftPair,
    x_star: &DVector<f64>,
    y_star: &DVector<f64>,
) -> Result<CovBlocks> {
    let m = chain.n_states();
    if observe.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: observe.len(),
        });
    }
    let (d1, d2) = (drift.d1, drift.d2);
    let mut g = DMatrix::zeros(m, d1 + d2);
    let mut b1 = DVector::zeros(d1);
    let mut b2 = DVector::zeros(d2);
    for (state, &xi) in observe.iter().enumerate() {
        drift.eval_h1_into(x_star, y_star, xi, &mut b1);
        drift.eval_h2_into(x_star, y_star, xi, &mut b2);
        for k in 0..d1 {
            g[(state, k)] = b1[k];
        }
        for k in 0..d2 {
            g[(state, d1 + k)] = b2[k];
        }
    }
    let stacked = sampling_cov_closed(chain, &g)?;
    Ok(CovBlocks::from_stacked(&stacked, d1))
}

/// Serialize a matrix as CSV, row-major, 17 significant digits.
pub fn write_matrix_csv<W: std::io::Write>(w: &mut W, m: &DMatrix<f64>) -> Result<()> {
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| format!("{:.16e}", m[(i, j)])).collect();
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

/// Parse a matrix back from the CSV form written by [`write_matrix_csv`].
pub fn read_matrix_csv(text: &str) -> Result<DMatrix<f64>> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row: std::result::Result<Vec<f64>, _> =
            line.split(',').map(|t| t.trim().parse::<f64>()).collect();
        let row = row.map_err(|e| Error::Parse {
            path: "<matrix csv>".into(),
            line: lineno + 1,
            msg: e.to_string(),
        })?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Parse {
            path: "<matrix csv>".into(),
            line: 0,
            msg: "empty matrix".into(),
        });
    }
    let cols = rows[0].len();
    if rows.iter().any(|r| r.len() != cols) {
        return Err(Error::Parse {
            path: "<matrix csv>".into(),
            line: 0,
            msg: "ragged rows".into(),
        });
    }
    Ok(DMatrix::from_fn(rows.len(), cols, |i, j| rows[i][j]))
}
