//! Quadratic minimax problem and the stochastic gradient descent-ascent
//! drift pair.
//!
//! Objective per sample i (maximized in y, minimized in x):
//!
//! `F(x, y, i) = -[ |y|²/2 - b(i)ᵀ y + t_i yᵀ x ] + (kappa/2) |x|²`
//!
//! Descent/ascent signs are folded into the drifts so the runner's uniform
//! "+" update does descent in x and ascent in y:
//! `h1 = t_i y - kappa x`, `h2 = -y + b(i) - t_i x`.
//! Because the rows of b are centered, the saddle point is the origin.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::rng::SplitMix64;
use crate::ttsa::{DriftJacobians, DriftPair};

#[derive(Debug, Clone)]
pub struct MinimaxProblem {
    /// Per-sample curvature scalars, each in (0, 0.1); A(i) = t_i I.
    t: Vec<f64>,
    /// N x d matrix of linear terms, columns centered to exact zero mean.
    b: DMatrix<f64>,
    kappa: f64,
}

impl MinimaxProblem {
    pub fn new(t: Vec<f64>, b: DMatrix<f64>, kappa: f64) -> Result<Self> {
        if t.len() != b.nrows() || t.is_empty() {
            return Err(Error::DimensionMismatch {
                expected: b.nrows(),
                found: t.len(),
            });
        }
        if t.iter().any(|&v| v <= 0.0 || v >= 0.1) {
            return Err(Error::InvalidArgument(
                "curvature scalars must lie in (0, 0.1)".into(),
            ));
        }
        let n = b.nrows() as f64;
        for k in 0..b.ncols() {
            let mean: f64 = (0..b.nrows()).map(|i| b[(i, k)]).sum::<f64>() / n;
            if mean.abs() > 1e-12 {
                return Err(Error::InvalidArgument(format!(
                    "column {k} of b has mean {mean:.3e}, expected 0 within 1e-12"
                )));
            }
        }
        if kappa <= 0.0 {
            return Err(Error::InvalidArgument("kappa must be positive".into()));
        }
        Ok(MinimaxProblem { t, b, kappa })
    }

    pub fn n_samples(&self) -> usize {
        self.t.len()
    }

    pub fn dim(&self) -> usize {
        self.b.ncols()
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn curvature(&self, i: usize) -> f64 {
        self.t[i]
    }

    pub fn linear_term(&self, i: usize) -> DVector<f64> {
        self.b.row(i).transpose()
    }
}

/// Seeded generator: `b'(i)` standard normal per coordinate then column
/// centered exactly; `t_i` uniform on (0, 0.1). The defaults used by the
/// experiments are kappa = 10, d = 10.
pub fn minimax_datagen(seed: u64, n: usize, d: usize, kappa: f64) -> MinimaxProblem {
    let mut rng = SplitMix64::new(seed);
    let mut b = DMatrix::from_fn(n, d, |_, _| rng.next_gaussian());
    for k in 0..d {
        let mean: f64 = (0..n).map(|i| b[(i, k)]).sum::<f64>() / n as f64;
        for i in 0..n {
            b[(i, k)] -= mean;
        }
    }
    let t: Vec<f64> = (0..n)
        .map(|_| loop {
            let u = rng.next_f64();
            if u > 0.0 {
                break 0.1 * u;
            }
        })
        .collect();
    MinimaxProblem::new(t, b, kappa).expect("generated data satisfies the invariants")
}

/// Descent-ascent drift pair; `reweight` is applied multiplicatively to both
/// drifts (both updates are reweighted gradients).
pub fn sgda_drift(problem: &Arc<MinimaxProblem>, reweight: Option<Vec<f64>>) -> Result<DriftPair> {
    let d = problem.dim();
    if let Some(w) = &reweight {
        if w.len() != problem.n_samples() {
            return Err(Error::DimensionMismatch {
                expected: problem.n_samples(),
                found: w.len(),
            });
        }
    }

    let p1 = problem.clone();
    let h1: crate::ttsa::DriftFn = Box::new(move |x, y, xi, out| {
        let t = p1.t[xi];
        for k in 0..out.nrows() {
            out[k] = t * y[k] - p1.kappa * x[k];
        }
    });

    let p2 = problem.clone();
    let h2: crate::ttsa::DriftFn = Box::new(move |x, y, xi, out| {
        let t = p2.t[xi];
        for k in 0..out.nrows() {
            out[k] = -y[k] + p2.b[(xi, k)] - t * x[k];
        }
    });

    let mut drift = DriftPair::new(d, d, h1, h2);
    drift.reweight = reweight;

    let (pa, pb) = (problem.clone(), problem.clone());
    drift.jacobians = Some(DriftJacobians {
        dh1_dx: Box::new(move |_x, _y, _xi| -pa.kappa * DMatrix::identity(pa.dim(), pa.dim())),
        dh1_dy: Box::new(move |_x, _y, xi| {
            let d = pb.dim();
            pb.t[xi] * DMatrix::identity(d, d)
        }),
        dh2_dx: {
            let p = problem.clone();
            Box::new(move |_x, _y, xi| {
                let d = p.dim();
                -p.t[xi] * DMatrix::identity(d, d)
            })
        },
        dh2_dy: {
            let p = problem.clone();
            Box::new(move |_x, _y, _xi| -DMatrix::identity(p.dim(), p.dim()))
        },
    });
    Ok(drift)
}

/// The saddle point: the origin of both spaces.
pub fn sgda_equilibrium(problem: &MinimaxProblem) -> (DVector<f64>, DVector<f64>) {
    (DVector::zeros(problem.dim()), DVector::zeros(problem.dim()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn datagen_centers_b_and_bounds_t() {
        let p = minimax_datagen(11, 50, 10, 10.0);
        for k in 0..10 {
            let mean: f64 = (0..50).map(|i| p.b[(i, k)]).sum::<f64>() / 50.0;
            assert!(mean.abs() < 1e-12);
        }
        for i in 0..50 {
            assert!(p.t[i] > 0.0 && p.t[i] < 0.1);
        }
    }

    #[test]
    fn datagen_is_deterministic() {
        let a = minimax_datagen(7, 30, 5, 10.0);
        let b = minimax_datagen(7, 30, 5, 10.0);
        assert_eq!(a.t, b.t);
        assert_eq!(a.b, b.b);
    }

    #[test]
    fn mean_fields_vanish_at_saddle() {
        let p = Arc::new(minimax_datagen(3, 40, 6, 10.0));
        let drift = sgda_drift(&p, None).unwrap();
        let target = vec![1.0 / 40.0; 40];
        let (x_star, y_star) = sgda_equilibrium(&p);
        let (m1, m2) = drift.empirical_mean_fields(&target, &x_star, &y_star);
        assert!(m1.amax() < 1e-10);
        assert!(m2.amax() < 1e-10);
    }

    #[test]
    fn single_sample_fast_root_map() {
        // one centered sample forces b = 0; solving h̄2 = 0 gives
        // lambda(x) = -t_1 x
        let t1 = 0.07;
        let p = Arc::new(
            MinimaxProblem::new(vec![t1], DMatrix::zeros(1, 3), 10.0).unwrap(),
        );
        let drift = sgda_drift(&p, None).unwrap();
        let x = DVector::from_vec(vec![1.0, -2.0, 0.5]);
        let lambda = -t1 * &x;
        let (_, m2) = drift.empirical_mean_fields(&[1.0], &x, &lambda);
        assert!(m2.amax() < 1e-14);
    }

    #[test]
    fn jacobians_match_finite_differences() {
        let p = Arc::new(minimax_datagen(9, 25, 4, 10.0));
        let target = vec![1.0 / 25.0; 25];
        let mut drift = sgda_drift(&p, None).unwrap();
        let x = DVector::from_fn(4, |k, _| 0.1 * k as f64);
        let y = DVector::from_fn(4, |k, _| -0.2 + 0.05 * k as f64);
        let analytic =
            crate::asymptotics::jacobian_blocks(&drift, &target, &x, &y, None).unwrap();
        drift.jacobians = None;
        let fd =
            crate::asymptotics::jacobian_blocks(&drift, &target, &x, &y, Some(1e-6)).unwrap();
        for (a, b) in [
            (&analytic.q11, &fd.q11),
            (&analytic.q12, &fd.q12),
            (&analytic.q21, &fd.q21),
            (&analytic.q22, &fd.q22),
        ] {
            assert!((a - b).amax() < 1e-8);
        }
    }

    #[test]
    fn reweight_scales_both_drifts() {
        let p = Arc::new(minimax_datagen(5, 4, 2, 10.0));
        let w = vec![2.0, 0.5, 1.0, 4.0];
        let plain = sgda_drift(&p, None).unwrap();
        let weighted = sgda_drift(&p, Some(w.clone())).unwrap();
        let x = DVector::from_vec(vec![0.3, -0.1]);
        let y = DVector::from_vec(vec![1.0, 2.0]);
        for (xi, &wi) in w.iter().enumerate() {
            let a1 = plain.eval_h1(&x, &y, xi) * wi;
            let b1 = weighted.eval_h1(&x, &y, xi);
            assert!((a1 - b1).amax() < 1e-15);
            let a2 = plain.eval_h2(&x, &y, xi) * wi;
            let b2 = weighted.eval_h2(&x, &y, xi);
            assert!((a2 - b2).amax() < 1e-15);
        }
    }
}
