use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Input outside the domain of an evaluator (below `r_min`, at a pole,
    /// outside a numerically solved profile span, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// A cartesian point on the symmetry axis has no cylindrical angle.
    #[error("point lies on the z axis, azimuth undefined")]
    Axis,

    /// A parameter set violates a family's schema or constraints.
    #[error("validation error: {0}")]
    Validation(String),

    /// psi' != 0, mu != 0 and sigma != 0 together: the reduced determining
    /// system has no solution with a full-rank coefficient matrix.
    #[error("rank-3 configuration rejected: {0}")]
    Rank3(String),

    /// A user supplied potential fails the determining-equation gate.
    #[error("residual gate failed: {equation} reached {residual:.3e} (tolerance {tolerance:.1e})")]
    ResidualGate {
        equation: String,
        residual: f64,
        tolerance: f64,
    },

    #[error("fixed-point iteration did not converge after {iterations} iterations (last update {last_update:.3e})")]
    Convergence { iterations: usize, last_update: f64 },

    #[error("inconsistent initial data: first-integral residual {residual:.3e} exceeds {tolerance:.1e}")]
    InconsistentInitialData { residual: f64, tolerance: f64 },

    #[error("positivity lost: gamma reached {value:.3e} at phi = {at}")]
    PositivityLoss { at: f64, value: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("unknown family '{0}'")]
    UnknownFamily(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn validation(msg: impl Into<String>) -> Error {
    Error::Validation(msg.into())
}
