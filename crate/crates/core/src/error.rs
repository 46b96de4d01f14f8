use thiserror::Error;

use crate::sdp::SdpSolution;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("missing dependency: {0}")]
    Dependency(String),

    #[error("resource limit exceeded: {0}")]
    Resource(String),

    /// Numerical breakdown of the interior-point iteration. Carries the last
    /// iterate so callers can inspect or resume from it.
    #[error("solver failure: {message}")]
    Solver {
        message: String,
        last_iterate: Option<Box<SdpSolution>>,
    },

    #[error("problem is infeasible: {0}")]
    Infeasible(String),

    #[error("corrupt data: {0}")]
    Data(String),

    #[error("internal invariant violated: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }

    pub(crate) fn internal(msg: impl Into<String>) -> Self {
        Error::Internal(msg.into())
    }

    pub(crate) fn data(msg: impl Into<String>) -> Self {
        Error::Data(msg.into())
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Argument(_) => 2,
            Error::Dependency(_) => 3,
            Error::Resource(_) => 4,
            Error::Solver { .. } | Error::Infeasible(_) => 5,
            Error::Data(_) | Error::Json(_) => 6,
            Error::Internal(_) => 7,
            Error::Io(_) => 8,
        }
    }
}
