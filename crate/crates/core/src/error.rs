use thiserror::Error;

use crate::correlation::SharedCorrelationFrame;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("matrix is not positive semi-definite: smallest eigenvalue {min_eigenvalue:e} below allowed {threshold:e}")]
    NotPsd { min_eigenvalue: f64, threshold: f64 },

    #[error("matrix is numerically singular: smallest eigenvalue {min_eigenvalue:e} <= {threshold:e}")]
    SingularMatrix { min_eigenvalue: f64, threshold: f64 },

    #[error("matrices do not share the given correlation matrix (residuals {residual_1:e}, {residual_2:e})")]
    NotSharedCorrelation { residual_1: f64, residual_2: f64 },

    #[error("frame does not reconstruct the covariances: residual {residual:e} exceeds {tolerance:e}")]
    InvalidFrame { residual: f64, tolerance: f64 },

    /// The geometric epsilon schedule ran out of steps. The best candidate is
    /// kept so callers can still report it.
    #[error("epsilon continuation did not stabilize after {steps} steps (best residuals {:e}, {:e})", .best.residual_mu, .best.residual_nu)]
    ContinuationDiverged {
        steps: usize,
        best: Box<SharedCorrelationFrame>,
    },

    #[error("numerical inconsistency: {0}")]
    NumericalInconsistency(String),

    #[error("unsupported dimension {dim} (maximum {max})")]
    UnsupportedDimension { dim: usize, max: usize },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
