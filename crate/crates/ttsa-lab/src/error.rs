//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("transition matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("row {row} of transition matrix sums to {sum}, expected 1 within 1e-12")]
    NotRowStochastic { row: usize, sum: f64 },

    #[error("negative transition probability {value} at ({row}, {col})")]
    NegativeEntry { row: usize, col: usize, value: f64 },

    #[error("chain is not ergodic: reducible (positive-entry digraph is not strongly connected)")]
    ReducibleChain,

    #[error("chain is not ergodic: periodic with period {period}")]
    PeriodicChain { period: usize },

    #[error("supplied stationary vector fails pi P = pi (residual {residual:.3e})")]
    StationaryMismatch { residual: f64 },

    #[error("probability vector invalid: {reason}")]
    InvalidProbability { reason: String },

    #[error("graph is not connected ({components} components)")]
    DisconnectedGraph { components: usize },

    #[error("graph node {node} has no neighbors")]
    IsolatedNode { node: usize },

    #[error("sampler has no finite-chain representation: {0}")]
    NoChainRepresentation(&'static str),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix {context} is singular or ill-conditioned (cond > {cond:.3e})")]
    IllConditioned { context: &'static str, cond: f64 },

    #[error("matrix {matrix} is not Hurwitz (max real part {max_real_part:.3e})")]
    NotHurwitz { matrix: String, max_real_part: f64 },

    #[error("step schedule requires 0.5 < a < b <= 1, got a = {a}, b = {b}")]
    InvalidSchedule { a: f64, b: f64 },

    #[error("iterate became non-finite at step {step} (trial {trial}); consider a projection radius")]
    NonFiniteIterate { step: u64, trial: usize },

    #[error("non-finite value in {context}")]
    NonFinite { context: String },

    #[error("closed-form sampling covariance diverges: closed classes have different means (max deviation {deviation:.3e})")]
    DivergentCovariance { deviation: f64 },

    #[error("samplers target different distributions (max deviation {deviation:.3e})")]
    TargetMismatch { deviation: f64 },

    #[error("checkpoint grids differ across trials")]
    CheckpointMismatch,

    #[error("{path}:{line}: {msg}")]
    Parse { path: String, line: usize, msg: String },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code for the CLI: 2 for configuration problems, 3 for
    /// numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidConfig(_)
            | Error::InvalidArgument(_)
            | Error::Parse { .. }
            | Error::Io(_)
            | Error::Json(_) => 2,
            _ => 3,
        }
    }
}
