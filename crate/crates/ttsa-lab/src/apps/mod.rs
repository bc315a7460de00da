//! Concrete drift pairs for the three application families, problem
//! generators, and data ingestion.

mod gtd;
mod logistic;
mod minimax;

pub use gtd::{
    gtd2_drift, gtd_drift, gtd_theory, tdc_drift, FiveStateTask, GtdAlgorithm, GtdTheory,
    ValueFamily, DISCOUNT, N_STATES, STATE_SCALE,
};
pub use logistic::{
    load_libsvm, momentum_equilibrium, momentum_sgd_drift, LogisticProblem,
};
pub use minimax::{minimax_datagen, sgda_drift, sgda_equilibrium, MinimaxProblem};

use nalgebra::{DMatrix, DVector};
use std::sync::Arc;

use crate::error::Result;
use crate::rng::SplitMix64;
use crate::ttsa::{DriftJacobians, DriftPair};

/// Decoupled linear test drift: `h1 = -x + c1[xi]`, `h2 = -y + c2[xi]` with
/// per-state offsets centered under `target`, so the equilibrium is the
/// origin and all CLT quantities are available in closed form.
pub fn custom_linear_drift(d1: usize, d2: usize, target: &[f64], seed: u64) -> Result<DriftPair> {
    let n_states = target.len();
    let mut rng = SplitMix64::new(seed);
    let mut c1: Vec<DVector<f64>> = (0..n_states)
        .map(|_| DVector::from_fn(d1, |_, _| rng.next_gaussian()))
        .collect();
    let mut c2: Vec<DVector<f64>> = (0..n_states)
        .map(|_| DVector::from_fn(d2, |_, _| rng.next_gaussian()))
        .collect();
    let mut mean1 = DVector::zeros(d1);
    let mut mean2 = DVector::zeros(d2);
    for (i, &p) in target.iter().enumerate() {
        mean1.axpy(p, &c1[i], 1.0);
        mean2.axpy(p, &c2[i], 1.0);
    }
    for v in c1.iter_mut() {
        *v -= &mean1;
    }
    for v in c2.iter_mut() {
        *v -= &mean2;
    }
    let offs1 = Arc::new(c1);
    let offs2 = Arc::new(c2);

    let o1 = offs1.clone();
    let h1: crate::ttsa::DriftFn = Box::new(move |x, _y, xi, out| {
        out.copy_from(&o1[xi]);
        *out -= x;
    });
    let o2 = offs2.clone();
    let h2: crate::ttsa::DriftFn = Box::new(move |_x, y, xi, out| {
        out.copy_from(&o2[xi]);
        *out -= y;
    });

    let mut drift = DriftPair::new(d1, d2, h1, h2);
    drift.mean_fields = Some((
        Box::new(move |x, _y| -x.clone()),
        Box::new(move |_x, y| -y.clone()),
    ));
    drift.jacobians = Some(DriftJacobians {
        dh1_dx: Box::new(move |_x, _y, _xi| -DMatrix::identity(d1, d1)),
        dh1_dy: Box::new(move |_x, _y, _xi| DMatrix::zeros(d1, d2)),
        dh2_dx: Box::new(move |_x, _y, _xi| DMatrix::zeros(d2, d1)),
        dh2_dy: Box::new(move |_x, _y, _xi| -DMatrix::identity(d2, d2)),
    });
    Ok(drift)
}
