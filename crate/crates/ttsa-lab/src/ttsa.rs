//! The coupled two-timescale recursion
//!
//! ```text
//! x_{n+1} = x_n + beta_{n+1}  h1(x_n, y_n, xi_{n+1})
//! y_{n+1} = y_n + gamma_{n+1} h2(x_n, y_n, xi_{n+1})
//! ```
//!
//! with polynomially decaying step sizes `beta_n = (n+1)^{-b}`,
//! `gamma_n = (n+1)^{-a}`, `0.5 < a < b <= 1`, plus multi-trial orchestration
//! with derived per-trial seeds.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chains::{Sampler, SamplerSpec};
use crate::error::{Error, Result};
use crate::rng::derive_seed;

/// Step-size exponents (a, b) with `0.5 < a < b <= 1`; the x-iterates move on
/// the slow `(n+1)^{-b}` scale and the y-iterates on the fast `(n+1)^{-a}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepSchedule {
    a: f64,
    b: f64,
}

impl StepSchedule {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a > 0.5 && a < b && b <= 1.0) || !a.is_finite() || !b.is_finite() {
            return Err(Error::InvalidSchedule { a, b });
        }
        Ok(StepSchedule { a, b })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// `(beta_n, gamma_n) = ((n+1)^{-b}, (n+1)^{-a})`.
    pub fn step_sizes(&self, n: u64) -> (f64, f64) {
        let base = (n + 1) as f64;
        (base.powf(-self.b), base.powf(-self.a))
    }

    /// True when the slow exponent sits at the boundary b = 1, which adds the
    /// half-identity shift to the slow-timescale Jacobian in the CLT.
    pub fn slow_boundary(&self) -> bool {
        self.b == 1.0
    }
}

/// Drift evaluator writing its value into `out`; the state argument indexes
/// the noise space.
pub type DriftFn = Box<dyn Fn(&DVector<f64>, &DVector<f64>, usize, &mut DVector<f64>) + Send + Sync>;
/// Mean field of a drift under the target distribution.
pub type MeanFieldFn = Box<dyn Fn(&DVector<f64>, &DVector<f64>) -> DVector<f64> + Send + Sync>;
/// Per-state Jacobian evaluator.
pub type JacFn = Box<dyn Fn(&DVector<f64>, &DVector<f64>, usize) -> DMatrix<f64> + Send + Sync>;

/// Per-state Jacobians of the raw drifts (before any importance reweight).
pub struct DriftJacobians {
    pub dh1_dx: JacFn,
    pub dh1_dy: JacFn,
    pub dh2_dx: JacFn,
    pub dh2_dy: JacFn,
}

/// A TTSA instance: the two drift evaluators, their dimensions, and optional
/// analytic structure.
///
/// `reweight`, when present, multiplies both drifts by the per-state factor
/// `w[xi]` (importance reweighting toward a uniform target under
/// degree-biased walks). The optional `mean_fields` must describe the
/// reweighted drift averaged under the intended target distribution; the
/// optional `jacobians` describe the raw per-state drifts and are combined
/// with the weights by the caller.
pub struct DriftPair {
    pub d1: usize,
    pub d2: usize,
    pub h1: DriftFn,
    pub h2: DriftFn,
    pub mean_fields: Option<(MeanFieldFn, MeanFieldFn)>,
    pub jacobians: Option<DriftJacobians>,
    pub reweight: Option<Vec<f64>>,
}

impl DriftPair {
    pub fn new(d1: usize, d2: usize, h1: DriftFn, h2: DriftFn) -> Self {
        DriftPair {
            d1,
            d2,
            h1,
            h2,
            mean_fields: None,
            jacobians: None,
            reweight: None,
        }
    }

    #[inline]
    pub fn weight(&self, xi: usize) -> f64 {
        self.reweight.as_ref().map_or(1.0, |w| w[xi])
    }

    #[inline]
    pub fn eval_h1_into(&self, x: &DVector<f64>, y: &DVector<f64>, xi: usize, out: &mut DVector<f64>) {
        (self.h1)(x, y, xi, out);
        let w = self.weight(xi);
        if w != 1.0 {
            *out *= w;
        }
    }

    #[inline]
    pub fn eval_h2_into(&self, x: &DVector<f64>, y: &DVector<f64>, xi: usize, out: &mut DVector<f64>) {
        (self.h2)(x, y, xi, out);
        let w = self.weight(xi);
        if w != 1.0 {
            *out *= w;
        }
    }

    pub fn eval_h1(&self, x: &DVector<f64>, y: &DVector<f64>, xi: usize) -> DVector<f64> {
        let mut out = DVector::zeros(self.d1);
        self.eval_h1_into(x, y, xi, &mut out);
        out
    }

    pub fn eval_h2(&self, x: &DVector<f64>, y: &DVector<f64>, xi: usize) -> DVector<f64> {
        let mut out = DVector::zeros(self.d2);
        self.eval_h2_into(x, y, xi, &mut out);
        out
    }

    /// Weighted-sum mean fields under `target`: `Σ_xi target[xi] w[xi] h_i`.
    pub fn empirical_mean_fields(
        &self,
        target: &[f64],
        x: &DVector<f64>,
        y: &DVector<f64>,
    ) -> (DVector<f64>, DVector<f64>) {
        let mut m1 = DVector::zeros(self.d1);
        let mut m2 = DVector::zeros(self.d2);
        let mut buf1 = DVector::zeros(self.d1);
        let mut buf2 = DVector::zeros(self.d2);
        for (xi, &p) in target.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            self.eval_h1_into(x, y, xi, &mut buf1);
            self.eval_h2_into(x, y, xi, &mut buf2);
            m1.axpy(p, &buf1, 1.0);
            m2.axpy(p, &buf2, 1.0);
        }
        (m1, m2)
    }
}

/// Checkpointed iterates of one trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub checkpoints: Vec<u64>,
    pub x_snapshots: Vec<Vec<f64>>,
    pub y_snapshots: Vec<Vec<f64>>,
    pub trial_seed: u64,
    pub final_n: u64,
}

/// Everything needed to run one trial. Cheap to clone; the drift and sampler
/// spec are borrowed.
#[derive(Clone)]
pub struct RunSpec<'a> {
    pub drift: &'a DriftPair,
    pub sampler: &'a SamplerSpec,
    pub schedule: StepSchedule,
    pub x0: DVector<f64>,
    pub y0: DVector<f64>,
    /// Initial noise state; `None` draws it from the sampler's target.
    pub start_state: Option<usize>,
    pub n_steps: u64,
    /// Sorted iteration indices to snapshot (0 records the initial point).
    pub checkpoints: Vec<u64>,
    /// Euclidean-ball projection radius applied to x and y after each step.
    pub projection_radius: Option<f64>,
}

/// Run the recursion once. The new noise state is drawn first; both iterates
/// then update simultaneously from the pre-update pair.
pub fn run_ttsa(spec: &RunSpec<'_>, seed: u64, trial: usize) -> Result<TrajectoryRecord> {
    if spec.n_steps < 1 {
        return Err(Error::InvalidArgument("n_steps must be >= 1".into()));
    }
    if !spec.x0.iter().chain(spec.y0.iter()).all(|v| v.is_finite()) {
        return Err(Error::NonFinite {
            context: "initial iterates".into(),
        });
    }
    let mut checkpoints: Vec<u64> = spec
        .checkpoints
        .iter()
        .copied()
        .filter(|&c| c <= spec.n_steps)
        .collect();
    checkpoints.sort_unstable();
    checkpoints.dedup();

    let mut sampler: Sampler = spec.sampler.instantiate(seed, spec.start_state);
    let mut x = spec.x0.clone();
    let mut y = spec.y0.clone();
    let mut h1 = DVector::zeros(spec.drift.d1);
    let mut h2 = DVector::zeros(spec.drift.d2);

    let mut xs = Vec::with_capacity(checkpoints.len());
    let mut ys = Vec::with_capacity(checkpoints.len());
    let mut next_cp = 0usize;
    if next_cp < checkpoints.len() && checkpoints[next_cp] == 0 {
        xs.push(x.as_slice().to_vec());
        ys.push(y.as_slice().to_vec());
        next_cp += 1;
    }

    for n in 0..spec.n_steps {
        let xi = sampler.step(&x, &y)?;
        let (beta, gamma) = spec.schedule.step_sizes(n + 1);
        spec.drift.eval_h1_into(&x, &y, xi, &mut h1);
        spec.drift.eval_h2_into(&x, &y, xi, &mut h2);
        x.axpy(beta, &h1, 1.0);
        y.axpy(gamma, &h2, 1.0);
        if let Some(radius) = spec.projection_radius {
            project_ball(&mut x, radius);
            project_ball(&mut y, radius);
        } else {
            let finite = x.iter().all(|v| v.is_finite()) && y.iter().all(|v| v.is_finite());
            if !finite {
                return Err(Error::NonFiniteIterate { step: n + 1, trial });
            }
        }
        if next_cp < checkpoints.len() && checkpoints[next_cp] == n + 1 {
            xs.push(x.as_slice().to_vec());
            ys.push(y.as_slice().to_vec());
            next_cp += 1;
        }
    }

    Ok(TrajectoryRecord {
        checkpoints,
        x_snapshots: xs,
        y_snapshots: ys,
        trial_seed: seed,
        final_n: spec.n_steps,
    })
}

fn project_ball(v: &mut DVector<f64>, radius: f64) {
    let norm = v.norm();
    if !norm.is_finite() {
        // non-finite entries are clipped coordinatewise first
        for e in v.iter_mut() {
            if !e.is_finite() {
                *e = if e.is_sign_negative() { -radius } else { radius };
            }
        }
    }
    let norm = v.norm();
    if norm > radius {
        *v *= radius / norm;
    }
}

/// Run `n_trials` independent trials; trial k is seeded with
/// `derive_seed(master_seed, k)` and trials are merged in index order, so the
/// output is reproducible regardless of thread scheduling.
pub fn run_trials(spec: &RunSpec<'_>, master_seed: u64, n_trials: usize) -> Result<Vec<TrajectoryRecord>> {
    if n_trials < 1 {
        return Err(Error::InvalidArgument("n_trials must be >= 1".into()));
    }
    let results: Vec<Result<TrajectoryRecord>> = (0..n_trials)
        .into_par_iter()
        .map(|k| run_ttsa(spec, derive_seed(master_seed, k as u64), k))
        .collect();
    results.into_iter().collect()
}

/// Geometric checkpoint grid: `per_decade` points per factor of ten, always
/// including `n_steps` itself.
pub fn geometric_checkpoints(n_steps: u64, per_decade: usize) -> Vec<u64> {
    let mut cps = Vec::new();
    let mut k = 0usize;
    loop {
        let value = 10f64.powf(k as f64 / per_decade as f64).round() as u64;
        if value > n_steps {
            break;
        }
        cps.push(value.max(1));
        k += 1;
    }
    cps.push(n_steps);
    cps.sort_unstable();
    cps.dedup();
    cps
}
