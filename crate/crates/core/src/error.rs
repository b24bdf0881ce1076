use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("capacity trace exhausted at t={at:.6}s with {remaining:.6} Mb still to deliver")]
    HorizonExceeded { at: f64, remaining: f64 },

    #[error("invalid decision for segment {segment}: {reason}")]
    InvalidDecision { segment: usize, reason: String },

    #[error("instance too large: {count} candidate sequences exceed the limit of {limit}")]
    InstanceTooLarge { count: f64, limit: f64 },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Io { .. } => 2,
            Error::Parse { .. } | Error::Validation(_) => 3,
            Error::InstanceTooLarge { .. } => 4,
            _ => 1,
        }
    }
}
