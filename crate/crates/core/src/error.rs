use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("vector must have at least one entry")]
    Empty,

    #[error("entry {index} is {value}; entries must be finite and strictly positive")]
    NonPositiveEntry { index: usize, value: f64 },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("invalid tolerance {0}; must be finite and > 0")]
    InvalidTolerance(f64),

    #[error("entries sum to {sum}, expected 1 within {tol:e}")]
    SimplexViolation { sum: f64, tol: f64 },

    #[error("invalid Renyi order {0}")]
    InvalidOrder(f64),

    #[error("degenerate spectrum: relative gap {gap:e} not above {threshold:e}")]
    DegenerateSpectrum { gap: f64, threshold: f64 },

    #[error("quadrature did not converge: value {value}, error {error:e} after {evaluations} evaluations")]
    NonConvergence {
        value: f64,
        error: f64,
        evaluations: usize,
    },

    #[error("invalid quadrature problem: {0}")]
    InvalidProblem(String),

    #[error("product {0} outside (0, 1/27]")]
    InfeasibleProduct(f64),

    #[error("constraint {constraint} is infeasible for n = {n}")]
    InfeasibleConstraint { constraint: String, n: usize },

    #[error("sample rejected: {0}")]
    Rejected(String),

    #[error("root finder failed to converge after {0} iterations")]
    RootSolverFailure(usize),

    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not symmetric (asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("matrix is not positive definite (smallest eigenvalue {0:e})")]
    NotPositiveDefinite(f64),

    #[error("Jacobi eigensolver did not converge in {0} sweeps")]
    EigenNoConvergence(usize),

    #[error("index k = {k} out of range 1..={n}")]
    IndexOutOfRange { k: usize, n: usize },

    #[error("trace is {0}, expected 1")]
    TraceViolation(f64),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
