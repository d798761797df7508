use thiserror::Error;

use crate::trace::Algorithm;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is not symmetric (max |A_ij - A_ji| = {0:e})")]
    NotSymmetric(f64),

    #[error("non-finite entry at position {0}")]
    NonFinite(usize),

    #[error("{what} did not converge after {iterations} iterations")]
    NoConvergence {
        what: &'static str,
        iterations: usize,
    },

    /// Gram block of the listed (0-based) support is not positive definite.
    #[error("singular restricted Gram matrix on support {support:?}")]
    Singular { support: Vec<usize> },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degenerate problem: {0}")]
    Degenerate(String),

    #[error("column {0} has zero norm")]
    ZeroColumn(usize),

    #[error("{algorithm} diverged at iteration {iteration}")]
    Divergence {
        algorithm: Algorithm,
        iteration: usize,
    },

    #[error("line search found no acceptable step above 1e-15")]
    LineSearchFailure,

    #[error("solution path exceeded the segment cap of {0}")]
    SegmentOverflow(usize),

    #[error("lambda {lambda} lies outside the path range [{lo}, {hi}]")]
    OutOfRange { lambda: f64, lo: f64, hi: f64 },

    #[error("ambiguous LARS step: features {0} and {1} tie for entry")]
    Ambiguous(usize, usize),

    #[error("oracle support unstable over the final iterations")]
    OracleUnstable,

    #[error("trace from {algorithm} cannot be checked against {bound}")]
    BoundMismatch {
        algorithm: Algorithm,
        bound: &'static str,
    },

    #[error("{0}")]
    Input(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
