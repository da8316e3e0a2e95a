use thiserror::Error;

/// Errors raised while building scenes, evaluating links, or running experiments.
#[derive(Debug, Error)]
pub enum Error {
    /// A configuration value is unusable. `path` is the dotted field path.
    #[error("invalid configuration at `{path}`: {reason}")]
    InvalidConfig { path: String, reason: String },

    #[error("time {t} s is outside the route span [{start}, {end}] s")]
    OutOfRange { t: f64, start: f64, end: f64 },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("malformed csv at line {line}: {reason}")]
    Csv { line: usize, reason: String },

    /// Some slots have less residual capacity than UEs to serve.
    #[error("capacity infeasible in slots {slots:?}")]
    Capacity { slots: Vec<usize> },
}

impl Error {
    pub(crate) fn config(path: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidConfig {
            path: path.into(),
            reason: reason.into(),
        }
    }
}

impl Error {
    /// Process exit code for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidConfig { .. } | Error::Json(_) => 2,
            Error::Capacity { .. } => 3,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
