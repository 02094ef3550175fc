use thiserror::Error;

/// Errors produced anywhere in the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is not symmetric: |A[{i}][{j}] - A[{j}][{i}]| = {dev:e} exceeds tolerance")]
    NotSymmetric { i: usize, j: usize, dev: f64 },

    #[error("matrix is not positive semi-definite: eigenvalue {min_eig:e} below -{tol:e}")]
    NotPsd { min_eig: f64, tol: f64 },

    #[error("invalid argument: {0}")]
    InvalidArg(String),

    #[error("eigendecomposition did not converge after {iterations} iterations")]
    EigFailed { iterations: usize },

    #[error("solver did not converge after {iterations} iterations ({what})")]
    NoConvergence { iterations: usize, what: String },

    #[error("infeasible system: best residual {residual:e} exceeds tolerance {tol:e}")]
    Infeasible { residual: f64, tol: f64 },

    #[error("vector is not representable in the dictionary span: residual {0:e}")]
    NotRepresentable(f64),

    #[error("subset budget exceeded: {candidates} candidates from a base set of {base} exceed the cap {cap}")]
    BudgetExceeded { base: usize, candidates: u128, cap: u64 },

    #[error(
        "sign-agreement failure: no qualifying row for residual with l1 norm {l1} at distance {dist:e} < 1/3 from the row span"
    )]
    SignAgreement { l1: i64, dist: f64 },

    #[error("greedy step did not decrease the l1 norm: {before} -> {after} using row {row}")]
    NoL1Decrease { row: usize, before: i64, after: i64 },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("format error: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn dim(msg: impl Into<String>) -> Self {
        Error::Dimension(msg.into())
    }

    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::InvalidArg(msg.into())
    }
}
