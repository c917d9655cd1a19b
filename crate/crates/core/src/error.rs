use thiserror::Error;

use crate::solver::SolveTrace;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A factorization or solve could not proceed. `pivot` names the failing
    /// pivot/step when one exists; `condition` carries an estimate of the
    /// 2-norm condition number when it was computed.
    #[error("numerical breakdown: {context}")]
    Breakdown { context: String, pivot: Option<usize>, condition: Option<f64> },

    #[error("dense materialization of {requested} entries exceeds the cap of {cap}")]
    Capacity { requested: usize, cap: usize },

    #[error("parameter outside the model domain: {0}")]
    Domain(String),

    #[error("coefficient of term {term} does not factorize over dimensions: {reason}")]
    UnsupportedCoefficient { term: usize, reason: String },

    #[error("degenerate selection at step {step}: {context}")]
    Degenerate { step: usize, context: String },

    #[error("iteration diverged at step {iteration} (residual {residual:e}); reduce the step size")]
    Divergence { iteration: usize, residual: f64, trace: Box<SolveTrace> },

    #[error("malformed data: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn breakdown(context: impl Into<String>, pivot: Option<usize>) -> Self {
        Error::Breakdown { context: context.into(), pivot, condition: None }
    }

    /// True for the errors that signal a numerical failure rather than bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Breakdown { .. } | Error::Divergence { .. } | Error::Degenerate { .. })
    }
}
