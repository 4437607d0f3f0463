use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("invalid fading profile: {0}")]
    InvalidProfile(String),

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("invalid pilot scheme: {0}")]
    InvalidPilot(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("zero-forcing needs M >= N + 1 (got M = {m}, N = {n})")]
    TooFewAntennas { m: usize, n: usize },

    /// Per-trial Gram matrix exceeded the condition-number guard.
    #[error("Gram matrix is numerically singular (condition number {cond:.3e})")]
    SingularGram { cond: f64 },

    #[error("covariance approximation is numerically singular (condition number {cond:.3e})")]
    SingularSigma { cond: f64 },

    #[error("LOS steering Gram matrix is numerically singular (condition number {cond:.3e})")]
    SingularSteering { cond: f64 },

    #[error("{discarded} of {trials} trials discarded, above the 1e-3 limit")]
    TooManyDiscards { discarded: usize, trials: usize },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    /// Process exit status used by the command-line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_)
            | Error::InvalidGeometry(_)
            | Error::InvalidProfile(_)
            | Error::InvalidScenario(_)
            | Error::InvalidPilot(_)
            | Error::InvalidArgument(_)
            | Error::TooFewAntennas { .. } => 2,
            Error::SingularGram { .. }
            | Error::SingularSigma { .. }
            | Error::SingularSteering { .. }
            | Error::TooManyDiscards { .. } => 4,
            Error::Io(_) => 1,
        }
    }
}
