// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("outside the small-width regime: {0}")]
    RegimeViolation(String),

    #[error("quadrature did not converge: estimate {estimate:e}, error {error:e} > tolerance {tolerance:e}")]
    NonConvergence {
        estimate: f64,
        error: f64,
        tolerance: f64,
    },

    #[error("filter passes almost nothing (p_W = {p_w:e})")]
    DegenerateFilter { p_w: f64 },

    #[error("phase undefined: |gamma| = {magnitude:e}")]
    PhaseUndefined { magnitude: f64 },

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Short machine-readable tag, also used by the CLI error output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidInput(_) => "InvalidInput",
            Error::RegimeViolation(_) => "RegimeViolation",
            Error::NonConvergence { .. } => "NonConvergence",
            Error::DegenerateFilter { .. } => "DegenerateFilter",
            Error::PhaseUndefined { .. } => "PhaseUndefined",
            Error::Config(_) => "ConfigError",
            Error::Io(_) => "IoError",
        }
    }

    /// Process exit status for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::InvalidInput(_) => 2,
            Error::NonConvergence { .. } => 3,
            Error::DegenerateFilter { .. } => 4,
            Error::RegimeViolation(_) => 5,
            Error::PhaseUndefined { .. } => 6,
            Error::Io(_) => 7,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
