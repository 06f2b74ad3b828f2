use thiserror::Error;

use crate::states::InternalLevel;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("state has zero norm")]
    ZeroNorm,

    #[error("measurement outcome |{level}> has probability {probability}")]
    ZeroProbability {
        level: InternalLevel,
        probability: f64,
    },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("integrator failure: {0}")]
    Integrator(String),

    #[error(
        "ramp integration did not converge: {steps} vs {doubled} steps differ by infidelity {infidelity:e} (limit {limit:e})"
    )]
    Convergence {
        steps: usize,
        doubled: usize,
        infidelity: f64,
        limit: f64,
    },

    #[error("reports are not comparable: {0}")]
    ProtocolMismatch(String),

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("malformed grid file: {0}")]
    GridFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            message: message.into(),
        }
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } | Error::InvalidParameter { .. } => 2,
            Error::Integrator(_) | Error::Convergence { .. } => 3,
            _ => 1,
        }
    }
}
