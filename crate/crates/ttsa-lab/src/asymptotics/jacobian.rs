//! Jacobian blocks of the mean fields at an equilibrium, analytically when
//! the drift carries per-state Jacobians, by central differences otherwise.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::ttsa::DriftPair;

use super::JacobianBlocks;

/// Default finite-difference step: `1e-5 * (1 + |point|_inf)`.
pub fn default_fd_step(x: &DVector<f64>, y: &DVector<f64>) -> f64 {
    let mag = x.amax().max(y.amax());
    1e-5 * (1.0 + mag)
}

/// Jacobians of the mean fields `h̄_i(x, y) = Σ_xi target[xi] w[xi] h_i` at
/// `(x_star, y_star)`.
///
/// When the drift provides per-state Jacobians they are combined exactly;
/// otherwise the mean fields (analytic if present, weighted sums if not) are
/// differentiated by central differences with step `fd_step`.
pub fn jacobian_blocks(
    drift: &DriftPair,
    target: &[f64],
    x_star: &DVector<f64>,
    y_star: &DVector<f64>,
    fd_step: Option<f64>,
) -> Result<JacobianBlocks> {
    if let Some(jacs) = &drift.jacobians {
        let (d1, d2) = (drift.d1, drift.d2);
        let mut q11 = DMatrix::zeros(d1, d1);
        let mut q12 = DMatrix::zeros(d1, d2);
        let mut q21 = DMatrix::zeros(d2, d1);
        let mut q22 = DMatrix::zeros(d2, d2);
        for (xi, &p) in target.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let w = p * drift.weight(xi);
            q11 += w * (jacs.dh1_dx)(x_star, y_star, xi);
            q12 += w * (jacs.dh1_dy)(x_star, y_star, xi);
            q21 += w * (jacs.dh2_dx)(x_star, y_star, xi);
            q22 += w * (jacs.dh2_dy)(x_star, y_star, xi);
        }
        let blocks = JacobianBlocks { q11, q12, q21, q22 };
        check_finite(&blocks)?;
        return Ok(blocks);
    }

    let step = fd_step.unwrap_or_else(|| default_fd_step(x_star, y_star));
    let eval = |x: &DVector<f64>, y: &DVector<f64>| -> (DVector<f64>, DVector<f64>) {
        match &drift.mean_fields {
            Some((m1, m2)) => (m1(x, y), m2(x, y)),
            None => drift.empirical_mean_fields(target, x, y),
        }
    };

    let (d1, d2) = (drift.d1, drift.d2);
    let mut q11 = DMatrix::zeros(d1, d1);
    let mut q12 = DMatrix::zeros(d1, d2);
    let mut q21 = DMatrix::zeros(d2, d1);
    let mut q22 = DMatrix::zeros(d2, d2);

    for k in 0..d1 {
        let mut xp = x_star.clone();
        let mut xm = x_star.clone();
        xp[k] += step;
        xm[k] -= step;
        let (h1p, h2p) = eval(&xp, y_star);
        let (h1m, h2m) = eval(&xm, y_star);
        let c1 = (h1p - h1m) / (2.0 * step);
        let c2 = (h2p - h2m) / (2.0 * step);
        q11.set_column(k, &c1);
        q21.set_column(k, &c2);
    }
    for k in 0..d2 {
        let mut yp = y_star.clone();
        let mut ym = y_star.clone();
        yp[k] += step;
        ym[k] -= step;
        let (h1p, h2p) = eval(x_star, &yp);
        let (h1m, h2m) = eval(x_star, &ym);
        let c1 = (h1p - h1m) / (2.0 * step);
        let c2 = (h2p - h2m) / (2.0 * step);
        q12.set_column(k, &c1);
        q22.set_column(k, &c2);
    }
    let blocks = JacobianBlocks { q11, q12, q21, q22 };
    check_finite(&blocks)?;
    Ok(blocks)
}

fn check_finite(blocks: &JacobianBlocks) -> Result<()> {
    let all = [&blocks.q11, &blocks.q12, &blocks.q21, &blocks.q22];
    if all.iter().any(|m| m.iter().any(|v| !v.is_finite())) {
        return Err(Error::NonFinite {
            context: "jacobian blocks (drift non-finite at perturbed point?)".into(),
        });
    }
    Ok(())
}
