//! L2-regularized logistic regression and the momentum-SGD drift pair.

use std::path::Path;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::rng::SplitMix64;
use crate::ttsa::{DriftJacobians, DriftPair};

/// Binary classification data with an L2 penalty:
/// `F(x, i) = log(1 + exp(xᵀ s_i)) - z_i xᵀ s_i + (kappa/2) |x|²`.
#[derive(Debug, Clone)]
pub struct LogisticProblem {
    features: DMatrix<f64>,
    labels: Vec<f64>,
    kappa: f64,
}

impl LogisticProblem {
    pub fn new(features: DMatrix<f64>, labels: Vec<f64>, kappa: f64) -> Result<Self> {
        if features.nrows() == 0 {
            return Err(Error::InvalidArgument("need at least one sample".into()));
        }
        if labels.len() != features.nrows() {
            return Err(Error::DimensionMismatch {
                expected: features.nrows(),
                found: labels.len(),
            });
        }
        if kappa < 0.0 || !kappa.is_finite() {
            return Err(Error::InvalidArgument("kappa must be finite and >= 0".into()));
        }
        if features.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                context: "feature matrix".into(),
            });
        }
        if labels.iter().any(|&z| z != 0.0 && z != 1.0) {
            return Err(Error::InvalidArgument("labels must be 0 or 1".into()));
        }
        Ok(LogisticProblem {
            features,
            labels,
            kappa,
        })
    }

    /// Separable-ish synthetic instance: Gaussian features, labels from a
    /// noisy linear rule.
    pub fn synthetic(seed: u64, n: usize, d: usize, kappa: f64) -> Self {
        let mut rng = SplitMix64::new(seed);
        let features = DMatrix::from_fn(n, d, |_, _| rng.next_gaussian());
        let w = DVector::from_fn(d, |_, _| rng.next_gaussian());
        let labels: Vec<f64> = (0..n)
            .map(|i| {
                let t: f64 = (0..d).map(|k| features[(i, k)] * w[k]).sum();
                if t + 0.3 * rng.next_gaussian() > 0.0 {
                    1.0
                } else {
                    0.0
                }
            })
            .collect();
        LogisticProblem::new(features, labels, kappa).expect("synthetic data is valid")
    }

    pub fn n_samples(&self) -> usize {
        self.features.nrows()
    }

    pub fn dim(&self) -> usize {
        self.features.ncols()
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    #[inline]
    fn margin(&self, x: &DVector<f64>, i: usize) -> f64 {
        let mut t = 0.0;
        for k in 0..self.dim() {
            t += self.features[(i, k)] * x[k];
        }
        t
    }

    /// Per-sample gradient written into `out`.
    #[inline]
    pub fn grad_into(&self, x: &DVector<f64>, i: usize, out: &mut DVector<f64>) {
        let t = self.margin(x, i);
        let p = 1.0 / (1.0 + (-t).exp());
        let c = p - self.labels[i];
        for k in 0..self.dim() {
            out[k] = c * self.features[(i, k)] + self.kappa * x[k];
        }
    }

    pub fn grad(&self, x: &DVector<f64>, i: usize) -> DVector<f64> {
        let mut out = DVector::zeros(self.dim());
        self.grad_into(x, i, &mut out);
        out
    }

    /// Per-sample Hessian `sigma'(t) s sᵀ + kappa I`.
    pub fn hessian(&self, x: &DVector<f64>, i: usize) -> DMatrix<f64> {
        let t = self.margin(x, i);
        let p = 1.0 / (1.0 + (-t).exp());
        let w = p * (1.0 - p);
        let d = self.dim();
        let mut h = DMatrix::from_fn(d, d, |a, b| w * self.features[(i, a)] * self.features[(i, b)]);
        for k in 0..d {
            h[(k, k)] += self.kappa;
        }
        h
    }

    /// Gradient of the q-weighted objective `Σ q_i F(x, i)` for a normalized
    /// weight vector q.
    pub fn weighted_grad(&self, x: &DVector<f64>, q: &[f64]) -> DVector<f64> {
        let mut g = DVector::zeros(self.dim());
        let mut buf = DVector::zeros(self.dim());
        for (i, &qi) in q.iter().enumerate() {
            if qi == 0.0 {
                continue;
            }
            self.grad_into(x, i, &mut buf);
            g.axpy(qi, &buf, 1.0);
        }
        g
    }

    pub fn weighted_hessian(&self, x: &DVector<f64>, q: &[f64]) -> DMatrix<f64> {
        let d = self.dim();
        let mut h = DMatrix::zeros(d, d);
        for (i, &qi) in q.iter().enumerate() {
            if qi == 0.0 {
                continue;
            }
            h += qi * self.hessian(x, i);
        }
        h
    }

    /// Minimizer of the q-weighted objective by Newton iteration; `kappa > 0`
    /// makes the problem strongly convex so this converges fast and serves as
    /// the equilibrium oracle.
    pub fn optimum(&self, q: &[f64]) -> Result<DVector<f64>> {
        if (q.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidProbability {
                reason: "weights must sum to 1".into(),
            });
        }
        let mut x = DVector::zeros(self.dim());
        for _ in 0..200 {
            let g = self.weighted_grad(&x, q);
            let h = self.weighted_hessian(&x, q);
            let step = h.lu().solve(&g).ok_or(Error::IllConditioned {
                context: "logistic Newton system",
                cond: f64::INFINITY,
            })?;
            x -= &step;
            if step.amax() < 1e-14 {
                return Ok(x);
            }
        }
        Err(Error::NonFinite {
            context: "logistic Newton failed to converge".into(),
        })
    }
}

/// Parse the sparse "label idx:val ..." text format (1-based indices).
/// Labels `+1`/`1` map to 1 and `-1`/`0` map to 0. `dim` pads every row to
/// the declared width; without it the max seen index sets the width.
pub fn load_libsvm(path: &Path, dim: Option<usize>, kappa: f64) -> Result<LogisticProblem> {
    let text = std::fs::read_to_string(path)?;
    parse_libsvm(&text, &path.display().to_string(), dim, kappa)
}

pub(crate) fn parse_libsvm(
    text: &str,
    path: &str,
    dim: Option<usize>,
    kappa: f64,
) -> Result<LogisticProblem> {
    let mut rows: Vec<(f64, Vec<(usize, f64)>)> = Vec::new();
    let mut max_idx = 0usize;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |msg: String| Error::Parse {
            path: path.to_string(),
            line: lineno + 1,
            msg,
        };
        let mut parts = line.split_whitespace();
        let label_tok = parts.next().ok_or_else(|| err("empty line".into()))?;
        let label = match label_tok {
            "+1" | "1" => 1.0,
            "-1" | "0" => 0.0,
            other => return Err(err(format!("bad label {other:?}"))),
        };
        let mut entries = Vec::new();
        let mut seen = std::collections::HashSet::new();
        for tok in parts {
            let (idx_s, val_s) = tok
                .split_once(':')
                .ok_or_else(|| err(format!("expected idx:val, got {tok:?}")))?;
            let idx: usize = idx_s
                .parse()
                .map_err(|e| err(format!("bad feature index {idx_s:?}: {e}")))?;
            if idx == 0 {
                return Err(err("feature indices are 1-based".into()));
            }
            let val: f64 = val_s
                .parse()
                .map_err(|e| err(format!("bad feature value {val_s:?}: {e}")))?;
            if !seen.insert(idx) {
                return Err(err(format!("duplicate feature index {idx}")));
            }
            max_idx = max_idx.max(idx);
            entries.push((idx, val));
        }
        rows.push((label, entries));
    }
    if rows.is_empty() {
        return Err(Error::Parse {
            path: path.to_string(),
            line: 0,
            msg: "no samples in file".into(),
        });
    }
    let d = match dim {
        Some(d) if d >= max_idx => d,
        Some(d) => {
            return Err(Error::InvalidArgument(format!(
                "declared dimension {d} below max feature index {max_idx}"
            )))
        }
        None => max_idx,
    };
    let mut features = DMatrix::zeros(rows.len(), d);
    let mut labels = Vec::with_capacity(rows.len());
    for (i, (label, entries)) in rows.into_iter().enumerate() {
        labels.push(label);
        for (idx, val) in entries {
            features[(i, idx - 1)] = val;
        }
    }
    LogisticProblem::new(features, labels, kappa)
}

/// Momentum SGD as a drift pair: `h1 = y`, `h2 = -(w_xi grad F(x, xi) + y)`.
///
/// The optional `reweight` (the 1/degree correction under SRW/NBRW) scales
/// only the gradient inside the momentum update, so it is folded into `h2`
/// here rather than set as the generic drift-level reweight. `target` is the
/// sampler occupancy the mean fields average over.
pub fn momentum_sgd_drift(
    problem: &Arc<LogisticProblem>,
    reweight: Option<Vec<f64>>,
    target: &[f64],
) -> Result<DriftPair> {
    let d = problem.dim();
    let n = problem.n_samples();
    if target.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: target.len(),
        });
    }
    if let Some(w) = &reweight {
        if w.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: w.len(),
            });
        }
    }
    let weights = Arc::new(reweight.unwrap_or_else(|| vec![1.0; n]));

    let h1: crate::ttsa::DriftFn = Box::new(move |_x, y, _xi, out| {
        out.copy_from(y);
    });

    let (p2, w2) = (problem.clone(), weights.clone());
    let h2: crate::ttsa::DriftFn = Box::new(move |x, y, xi, out| {
        p2.grad_into(x, xi, out);
        let w = w2[xi];
        for k in 0..out.nrows() {
            out[k] = -(w * out[k] + y[k]);
        }
    });

    let mut drift = DriftPair::new(d, d, h1, h2);

    // mean fields under the target occupancy
    let (pm, wm) = (problem.clone(), weights.clone());
    let tgt = target.to_vec();
    let mf1: crate::ttsa::MeanFieldFn = Box::new(move |_x, y| y.clone());
    let mf2: crate::ttsa::MeanFieldFn = Box::new(move |x, y| {
        let mut acc = DVector::zeros(pm.dim());
        let mut buf = DVector::zeros(pm.dim());
        for (i, &p) in tgt.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            pm.grad_into(x, i, &mut buf);
            acc.axpy(p * wm[i], &buf, 1.0);
        }
        -(acc + y)
    });
    drift.mean_fields = Some((mf1, mf2));

    let (pj, wj) = (problem.clone(), weights);
    drift.jacobians = Some(DriftJacobians {
        dh1_dx: Box::new(move |_x, _y, _xi| DMatrix::zeros(d, d)),
        dh1_dy: Box::new(move |_x, _y, _xi| DMatrix::identity(d, d)),
        dh2_dx: Box::new(move |x, _y, xi| -wj[xi] * pj.hessian(x, xi)),
        dh2_dy: Box::new(move |_x, _y, _xi| -DMatrix::identity(d, d)),
    });
    Ok(drift)
}

/// Equilibrium of the momentum drift under `target` occupancy and gradient
/// weights: x* minimizes the effective objective, y* = 0.
pub fn momentum_equilibrium(
    problem: &LogisticProblem,
    target: &[f64],
    reweight: Option<&[f64]>,
) -> Result<(DVector<f64>, DVector<f64>)> {
    let n = problem.n_samples();
    let mut q: Vec<f64> = (0..n)
        .map(|i| target[i] * reweight.map_or(1.0, |w| w[i]))
        .collect();
    let total: f64 = q.iter().sum();
    if total <= 0.0 {
        return Err(Error::InvalidProbability {
            reason: "effective weights sum to zero".into(),
        });
    }
    for v in q.iter_mut() {
        *v /= total;
    }
    let x = problem.optimum(&q)?;
    let y = DVector::zeros(problem.dim());
    Ok((x, y))
}
