use thiserror::Error;

/// Errors raised by the toolkit.
///
/// Variants are grouped by the exit-code class the command line maps them
/// to: numeric degeneracy, invalid input, and I/O.
#[derive(Debug, Error)]
pub enum Error {
    #[error("quadrature did not converge: {0}")]
    QuadratureFailure(String),
    #[error("scaling matrix is degenerate (smallest eigenvalue {min_eigenvalue:e} <= {tolerance:e})")]
    DegenerateScaling { min_eigenvalue: f64, tolerance: f64 },
    #[error("no truncation constant up to {kappa_max:e} gives a full-rank truncated covariance")]
    NoValidKappa { kappa_max: f64 },
    #[error("moment is not finite: {0}")]
    IndeterminateMoment(String),
    #[error("matrix is not positive semi-definite (smallest eigenvalue {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },
    #[error("Levy measure has infinite activity; use the small-jump approximation")]
    InfiniteActivity,
    #[error("radial tail table is not monotone at knot {0}")]
    TableBuildFailure(usize),
    #[error("invalid small-jump cutoff {0}")]
    InvalidCutoff(f64),
    #[error("sample is empty")]
    EmptySample,
    #[error("dimension {dim} exceeds the exact-path limit ({limit})")]
    DimensionTooLarge { dim: usize, limit: String },
    #[error("non-diagonal Gaussian reference CDFs are not supported")]
    NonDiagonalUnsupported,
    #[error("direction {index} has zero variance under the reference covariance")]
    DegenerateDirection { index: usize },
    #[error("reference tail integral does not converge")]
    TailDivergence,
    #[error("insufficient signal: {usable} usable points, need {required}")]
    InsufficientSignal { usable: usize, required: usize },
    #[error("time grid ends before an admissible point can be selected")]
    HorizonExhausted,
    #[error("no admissible grid point in window [{lo}, {hi}] below threshold {threshold}")]
    SelectionFailure { lo: f64, hi: f64, threshold: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("malformed file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// True for failures caused by degenerate numerics rather than bad input.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::QuadratureFailure(_)
                | Error::DegenerateScaling { .. }
                | Error::NoValidKappa { .. }
                | Error::IndeterminateMoment(_)
                | Error::NotPsd { .. }
                | Error::InfiniteActivity
                | Error::TableBuildFailure(_)
                | Error::DegenerateDirection { .. }
                | Error::TailDivergence
                | Error::InsufficientSignal { .. }
                | Error::HorizonExhausted
                | Error::SelectionFailure { .. }
        )
    }
}
