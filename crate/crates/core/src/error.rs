use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    /// The closed forms divide by a quality gap that is zero here.
    #[error("degenerate market: {0}")]
    DegenerateMarket(String),

    #[error("scheduler invoked on an empty cell")]
    EmptyCell,

    #[error("rate vector has {rates} entries but the scheduler tracks {users} users")]
    LengthMismatch { rates: usize, users: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("cannot access {}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed manifest {}", path.display())]
    Manifest {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("serialization failed: {0}")]
    Serialize(String),
}

impl Error {
    pub(crate) fn invalid(name: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name: name.into(),
            reason: reason.into(),
        }
    }

    /// Errors caused by bad user input rather than by the environment.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter { .. }
                | Error::DegenerateMarket(_)
                | Error::Config(_)
                | Error::Manifest { .. }
        )
    }
}
