//! Diagnostic statistics over trial records: MSE curves with the rescaled
//! (CLT-normalized) variants, per-coordinate normality checks of the
//! standardized final iterates, and two-sampler efficiency-ordering verdicts.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::ks::{ks_p_value, ks_statistic, normal_cdf};
use crate::asymptotics::{
    cov_blocks_closed, limiting_covariances, loewner_leq, sampling_cov_mc, CovBlocks,
    JacobianBlocks, McOptions,
};
use crate::chains::{chain_of_sampler, SamplerSpec};
use crate::error::{Error, Result};
use crate::ttsa::{DriftPair, StepSchedule, TrajectoryRecord};

/// One checkpoint row of an MSE report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MseRow {
    pub n: u64,
    pub beta: f64,
    pub gamma: f64,
    pub mse_x: f64,
    pub se_x: f64,
    pub mse_y: f64,
    pub se_y: f64,
    pub rescaled_x: f64,
    pub rescaled_y: f64,
}

/// MSE and rescaled-MSE curves across a common checkpoint grid, with the
/// theoretical plateau levels attached when an asymptotic model is available.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MseReport {
    pub rows: Vec<MseRow>,
    pub n_trials: usize,
    pub theory_trace_v_x: Option<f64>,
    pub theory_trace_v_y: Option<f64>,
}

impl MseReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,beta,gamma,mse_x,se_x,mse_y,se_y,rescaled_x,rescaled_y\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
                r.n, r.beta, r.gamma, r.mse_x, r.se_x, r.mse_y, r.se_y, r.rescaled_x, r.rescaled_y
            ));
        }
        out
    }

    /// Least-squares slope of `log rescaled_x` against `log n` over the last
    /// decade of checkpoints.
    pub fn rescaled_x_slope_last_decade(&self) -> Option<f64> {
        let n_max = self.rows.last()?.n;
        let pts: Vec<(f64, f64)> = self
            .rows
            .iter()
            .filter(|r| r.n * 10 >= n_max && r.rescaled_x > 0.0)
            .map(|r| ((r.n as f64).ln(), r.rescaled_x.ln()))
            .collect();
        log_slope(&pts)
    }
}

fn log_slope(pts: &[(f64, f64)]) -> Option<f64> {
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        None
    } else {
        Some(sxy / sxx)
    }
}

/// Mean squared errors at each checkpoint, rescaled by the step sizes, plus
/// theoretical plateau traces when supplied.
pub fn mse_curve(
    records: &[TrajectoryRecord],
    x_star: &DVector<f64>,
    y_star: &DVector<f64>,
    schedule: &StepSchedule,
    theory: Option<(f64, f64)>,
) -> Result<MseReport> {
    if records.len() < 2 {
        return Err(Error::InvalidArgument("need at least 2 trials".into()));
    }
    let grid = &records[0].checkpoints;
    if records.iter().any(|r| &r.checkpoints != grid) {
        return Err(Error::CheckpointMismatch);
    }
    let t = records.len() as f64;
    let mut rows = Vec::with_capacity(grid.len());
    for (c, &n) in grid.iter().enumerate() {
        let mut sq_x = Vec::with_capacity(records.len());
        let mut sq_y = Vec::with_capacity(records.len());
        for r in records {
            let dx: f64 = r.x_snapshots[c]
                .iter()
                .zip(x_star.iter())
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            let dy: f64 = r.y_snapshots[c]
                .iter()
                .zip(y_star.iter())
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            sq_x.push(dx);
            sq_y.push(dy);
        }
        let mse_x = sq_x.iter().sum::<f64>() / t;
        let mse_y = sq_y.iter().sum::<f64>() / t;
        let var_x = sq_x.iter().map(|v| (v - mse_x) * (v - mse_x)).sum::<f64>() / (t - 1.0);
        let var_y = sq_y.iter().map(|v| (v - mse_y) * (v - mse_y)).sum::<f64>() / (t - 1.0);
        let (beta, gamma) = schedule.step_sizes(n);
        rows.push(MseRow {
            n,
            beta,
            gamma,
            mse_x,
            se_x: (var_x / t).sqrt(),
            mse_y,
            se_y: (var_y / t).sqrt(),
            rescaled_x: mse_x / beta,
            rescaled_y: mse_y / gamma,
        });
    }
    Ok(MseReport {
        rows,
        n_trials: records.len(),
        theory_trace_v_x: theory.map(|t| t.0),
        theory_trace_v_y: theory.map(|t| t.1),
    })
}

/// Per-coordinate histogram of standardized samples.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Histogram {
    pub lo: f64,
    pub hi: f64,
    pub counts: Vec<u32>,
}

/// Normality check of the standardized slow iterates at the final
/// checkpoint.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CltReport {
    pub n: u64,
    pub n_trials: usize,
    /// `beta_n^{-1/2} (x_n - x*)` per trial, one row per trial.
    pub standardized: Vec<Vec<f64>>,
    pub empirical_cov: Vec<Vec<f64>>,
    pub theory_v_x: Vec<Vec<f64>>,
    pub ks_statistic: Vec<f64>,
    pub ks_p_value: Vec<f64>,
    pub histograms: Vec<Histogram>,
    /// True when every coordinate passes at p >= 0.01.
    pub passes: bool,
    /// Set when fewer than 50 trials were available.
    pub low_trials: bool,
}

/// KS test of each coordinate of `beta_n^{-1/2}(x_n - x*)` against the
/// centered normal with the matching theoretical variance.
pub fn clt_check(
    records: &[TrajectoryRecord],
    x_star: &DVector<f64>,
    schedule: &StepSchedule,
    v_x: &DMatrix<f64>,
) -> Result<CltReport> {
    if records.len() < 2 {
        return Err(Error::InvalidArgument("need at least 2 trials".into()));
    }
    let grid = &records[0].checkpoints;
    if records.iter().any(|r| &r.checkpoints != grid) {
        return Err(Error::CheckpointMismatch);
    }
    let n = *grid.last().ok_or_else(|| {
        Error::InvalidArgument("records carry no checkpoints".into())
    })?;
    let c = grid.len() - 1;
    let d = x_star.len();
    let (beta, _) = schedule.step_sizes(n);
    let scale = beta.sqrt();

    let standardized: Vec<Vec<f64>> = records
        .iter()
        .map(|r| {
            r.x_snapshots[c]
                .iter()
                .zip(x_star.iter())
                .map(|(a, b)| (a - b) / scale)
                .collect()
        })
        .collect();

    let t = records.len() as f64;
    let mut mean = vec![0.0; d];
    for s in &standardized {
        for k in 0..d {
            mean[k] += s[k] / t;
        }
    }
    let mut cov = DMatrix::zeros(d, d);
    for s in &standardized {
        for a in 0..d {
            for b in 0..d {
                cov[(a, b)] += (s[a] - mean[a]) * (s[b] - mean[b]) / (t - 1.0);
            }
        }
    }

    let mut ks_d = Vec::with_capacity(d);
    let mut ks_p = Vec::with_capacity(d);
    let mut histograms = Vec::with_capacity(d);
    for k in 0..d {
        let sigma2 = v_x[(k, k)];
        if sigma2 <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "theoretical variance of coordinate {k} is not positive"
            )));
        }
        let sigma = sigma2.sqrt();
        let samples: Vec<f64> = standardized.iter().map(|s| s[k] / sigma).collect();
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                context: "standardized samples".into(),
            });
        }
        let dstat = ks_statistic(&samples, normal_cdf);
        ks_d.push(dstat);
        ks_p.push(ks_p_value(dstat, samples.len()));

        let (lo, hi, bins) = (-4.0 * sigma, 4.0 * sigma, 20usize);
        let mut counts = vec![0u32; bins];
        for s in &standardized {
            let v = s[k];
            let b = (((v - lo) / (hi - lo)) * bins as f64).floor();
            let b = (b.max(0.0) as usize).min(bins - 1);
            counts[b] += 1;
        }
        histograms.push(Histogram { lo, hi, counts });
    }

    let passes = ks_p.iter().all(|&p| p >= 0.01);
    Ok(CltReport {
        n,
        n_trials: records.len(),
        standardized,
        empirical_cov: matrix_rows(&cov),
        theory_v_x: matrix_rows(v_x),
        ks_statistic: ks_d,
        ks_p_value: ks_p,
        histograms,
        passes,
        low_trials: records.len() < 50,
    })
}

pub(crate) fn matrix_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

/// How the stacked covariance of one sampler was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CovMethod {
    ClosedForm,
    MonteCarlo,
}

/// Per-sampler half of an ordering report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SamplerCovReport {
    pub label: String,
    pub method: CovMethod,
    pub trace_u: f64,
    /// Standard error of the trace, Monte Carlo only.
    pub trace_u_se: Option<f64>,
    pub u_stacked: Vec<Vec<f64>>,
    pub trace_v_x: f64,
    pub trace_v_y: f64,
}

/// Efficiency-ordering verdict between two samplers driving the same drift.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OrderingReport {
    pub first: SamplerCovReport,
    pub second: SamplerCovReport,
    /// Loewner verdicts: does the second sampler dominate (U_2 <=_L U_1)?
    pub u_second_leq_first: bool,
    pub u_first_leq_second: bool,
    pub v_x_second_leq_first: bool,
    pub v_y_second_leq_first: bool,
    pub tol: f64,
}

/// Controls for [`ordering_report`].
#[derive(Debug, Clone, Copy)]
pub struct OrderingOptions {
    pub mc: McOptions,
    /// Estimate by Monte Carlo even when a finite-chain view exists.
    pub force_mc: bool,
    pub tol: f64,
}

impl Default for OrderingOptions {
    fn default() -> Self {
        OrderingOptions {
            mc: McOptions::default(),
            force_mc: false,
            tol: 1e-9,
        }
    }
}

/// Compare two samplers with the same target distribution through the lens
/// of one drift: stacked sampling covariance (closed form where a finite
/// chain exists, Monte Carlo otherwise) and the induced limiting covariances
/// under shared Jacobian blocks.
#[allow(clippy::too_many_arguments)]
pub fn ordering_report(
    drift: &DriftPair,
    x_star: &DVector<f64>,
    y_star: &DVector<f64>,
    blocks: &JacobianBlocks,
    schedule: &StepSchedule,
    first: (&str, &SamplerSpec),
    second: (&str, &SamplerSpec),
    opts: &OrderingOptions,
) -> Result<OrderingReport> {
    let ta = first.1.target_distribution().ok_or(Error::NoChainRepresentation(
        "first sampler has no fixed target",
    ))?;
    let tb = second.1.target_distribution().ok_or(Error::NoChainRepresentation(
        "second sampler has no fixed target",
    ))?;
    if ta.len() != tb.len() {
        return Err(Error::TargetMismatch { deviation: f64::NAN });
    }
    let deviation = ta
        .iter()
        .zip(&tb)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);
    if deviation > 1e-9 {
        return Err(Error::TargetMismatch { deviation });
    }

    let side = |label: &str, spec: &SamplerSpec, seed_bump: u64| -> Result<SamplerCovReport> {
        let (covs, method, trace_se) = stacked_cov(drift, x_star, y_star, spec, opts, seed_bump)?;
        let (v_x, v_y) = limiting_covariances(blocks, &covs, schedule)?;
        Ok(SamplerCovReport {
            label: label.to_string(),
            method,
            trace_u: covs.stacked().trace(),
            trace_u_se: trace_se,
            u_stacked: matrix_rows(&covs.stacked()),
            trace_v_x: v_x.trace(),
            trace_v_y: v_y.trace(),
        })
    };

    let rep_first = side(first.0, first.1, 0)?;
    let rep_second = side(second.0, second.1, 1)?;

    let u1 = rows_to_matrix(&rep_first.u_stacked);
    let u2 = rows_to_matrix(&rep_second.u_stacked);
    let covs1 = CovBlocks::from_stacked(&u1, drift.d1);
    let covs2 = CovBlocks::from_stacked(&u2, drift.d1);
    let (vx1, vy1) = limiting_covariances(blocks, &covs1, schedule)?;
    let (vx2, vy2) = limiting_covariances(blocks, &covs2, schedule)?;

    Ok(OrderingReport {
        u_second_leq_first: loewner_leq(&u2, &u1, opts.tol)?,
        u_first_leq_second: loewner_leq(&u1, &u2, opts.tol)?,
        v_x_second_leq_first: loewner_leq(&vx2, &vx1, opts.tol)?,
        v_y_second_leq_first: loewner_leq(&vy2, &vy1, opts.tol)?,
        tol: opts.tol,
        first: rep_first,
        second: rep_second,
    })
}

fn stacked_cov(
    drift: &DriftPair,
    x_star: &DVector<f64>,
    y_star: &DVector<f64>,
    spec: &SamplerSpec,
    opts: &OrderingOptions,
    seed_bump: u64,
) -> Result<(CovBlocks, CovMethod, Option<f64>)> {
    if !opts.force_mc {
        if let Ok(sc) = chain_of_sampler(spec) {
            let covs = cov_blocks_closed(&sc.chain, &sc.observe, drift, x_star, y_star)?;
            return Ok((covs, CovMethod::ClosedForm, None));
        }
    }
    let (d1, d2) = (drift.d1, drift.d2);
    let g = |xi: usize| -> DVector<f64> {
        let mut out = DVector::zeros(d1 + d2);
        let mut b1 = DVector::zeros(d1);
        let mut b2 = DVector::zeros(d2);
        drift.eval_h1_into(x_star, y_star, xi, &mut b1);
        drift.eval_h2_into(x_star, y_star, xi, &mut b2);
        out.rows_mut(0, d1).copy_from(&b1);
        out.rows_mut(d1, d2).copy_from(&b2);
        out
    };
    let mut mc = opts.mc;
    mc.seed = mc.seed.wrapping_add(seed_bump);
    let est = sampling_cov_mc(spec, &g, None, &mc)?;
    let trace_se = Some(est.trace_std_err());
    let stacked = 0.5 * (&est.mean + est.mean.transpose());
    Ok((CovBlocks::from_stacked(&stacked, d1), CovMethod::MonteCarlo, trace_se))
}

fn rows_to_matrix(rows: &[Vec<f64>]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), rows[0].len(), |i, j| rows[i][j])
}
