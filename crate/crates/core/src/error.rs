use thiserror::Error;

/// Failure modes shared by every module of the crate.
///
/// The variants fall into two families: [`Error::Domain`]-like errors mean the
/// caller asked for something outside an operation's contract, while the
/// numerical variants mean the inputs were legal but the computation could not
/// certify its answer.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("singular at {at}: {message}")]
    Singularity { at: f64, message: String },

    #[error("precision error: {message} (best achieved bound {best_bound:e})")]
    Precision { message: String, best_bound: f64 },

    #[error("detection error: {message} (achieved exponents {achieved:?})")]
    Detection { message: String, achieved: Vec<f64> },

    #[error("integration error at step {step} (t = {t}): {message}")]
    Integration {
        step: usize,
        t: f64,
        message: String,
    },

    #[error("search failure: {message} (closest return distance {closest_return:e})")]
    SearchFailure {
        message: String,
        closest_return: f64,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn precision(msg: impl Into<String>, best_bound: f64) -> Self {
        Error::Precision {
            message: msg.into(),
            best_bound,
        }
    }

    /// Short machine-readable category, used for structured diagnostics.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::Precondition(_) => "precondition",
            Error::Singularity { .. } => "singularity",
            Error::Precision { .. } => "precision",
            Error::Detection { .. } => "detection",
            Error::Integration { .. } => "integration",
            Error::SearchFailure { .. } => "search_failure",
        }
    }

    /// True for errors caused by invalid input rather than by numerics.
    pub fn is_domain(&self) -> bool {
        matches!(
            self,
            Error::Domain(_) | Error::Precondition(_) | Error::Singularity { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
