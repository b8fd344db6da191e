use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// A precondition on an argument was violated.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The counterbalanced coefficient recursion divides by `k - p`, which
    /// vanishes at the first step when `p = 1`.
    #[error("counterbalanced coefficients undefined at p=1")]
    CounterbalancedAtUnitP,

    /// A bracket or replay operation needs `V̂`/`Ǧ` series that were not
    /// recorded; rerun the simulation with `emit_aux` enabled.
    #[error("auxiliary series required")]
    AuxiliaryRequired,

    /// The closed second-moment recursions hold only for step laws with
    /// mean zero.
    #[error("second-moment oracle requires centred law")]
    CentredLawRequired,

    /// A covariance matrix failed to factorize even after the permitted
    /// diagonal jitter.  `leading_minor` is the order of the first
    /// non-positive-definite leading principal minor.
    #[error("covariance factorization failed at leading minor {leading_minor} (jitter up to {max_jitter:e} exhausted)")]
    NumericalDegeneracy {
        /// Order of the offending leading principal minor.
        leading_minor: usize,
        /// Largest diagonal jitter that was attempted.
        max_jitter: f64,
    },

    /// I/O failure while reading or writing an external artifact.
    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    /// Malformed external data (CSV, config, or report files).
    #[error("parse: {0}")]
    Parse(String),
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
