//! # ttsa-lab
//!
//! A laboratory for coupled stochastic-approximation recursions driven by
//! Markovian noise. It has two halves that check each other:
//!
//! * **Simulation**: a generic two-timescale runner (`ttsa`) over pluggable
//!   noise sources (`chains`): iid draws, single/random shuffling, simple
//!   and non-backtracking random walks on graphs, explicit finite chains,
//!   and iterate-controlled kernels, with reproducible multi-trial
//!   orchestration.
//! * **Theory**: closed-form asymptotics on finite chains (`asymptotics`):
//!   Poisson solutions, long-run sampling covariances, Jacobian blocks,
//!   and the limiting covariances `V_x`, `V_y` of the central limit
//!   theorem, so empirical iterate statistics can be validated against
//!   exact numbers at desk scale.
//!
//! The `apps` module instantiates three families on top of the runner:
//! momentum SGD on regularized logistic regression, stochastic
//! gradient descent-ascent on a quadratic minimax problem, and the GTD2/TDC
//! value-estimation pair on a five-state random-walk task with nonlinear
//! function approximation. The `harness` module turns runs into report files
//! (MSE curves, rescaled MSE, normality checks, efficiency-ordering
//! verdicts) and backs the `ttsa-lab` command-line tool.
//!
//! Start with the `examples/` directory: each file is a runnable tour of one
//! capability.

pub mod asymptotics;
pub mod chains;
pub mod error;
pub mod rng;
pub mod synth;
pub mod ttsa;

pub mod apps;
pub mod harness;

pub use error::{Error, Result};
