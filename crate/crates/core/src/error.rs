use thiserror::Error;

/// Errors produced by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown chain family `{0}`")]
    UnknownFamily(String),

    #[error("invalid family domain: {0}")]
    InvalidDomain(String),

    #[error("parameter point outside the family domain: {0}")]
    OutsideDomain(String),

    #[error("invalid state space: {0}")]
    InvalidStateSpace(String),

    #[error("invalid transition matrix: {0}")]
    InvalidMatrix(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("transition matrix is not irreducible and aperiodic")]
    NotErgodic,

    #[error("power iteration did not converge after {0} iterations")]
    NoConvergence(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("state spaces do not match")]
    MismatchedStateSpace,

    #[error("merged support has {0} points; exact enumeration is limited to {max}", max = crate::metrics::MAX_EXACT_SUPPORT)]
    SupportTooLarge(usize),

    #[error("degenerate posterior: every grid point assigns zero probability to the data")]
    DegeneratePosterior,

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for errors that come from the model itself (non-ergodic chains,
    /// degenerate posteriors) rather than from malformed input.
    pub fn is_degenerate_model(&self) -> bool {
        matches!(self, Error::NotErgodic | Error::DegeneratePosterior | Error::NoConvergence(_))
    }

    /// True for errors caused by an invalid configuration or parameter choice.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::UnknownFamily(_)
                | Error::InvalidDomain(_)
                | Error::OutsideDomain(_)
                | Error::InvalidArgument(_)
                | Error::Config(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
