use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("tensor is not symmetric (xy = {xy}, yx = {yx})")]
    NonSymmetric { xy: f64, yx: f64 },

    #[error("incompatible input: {0}")]
    Incompatible(String),

    #[error("{solver} did not converge after {iterations} iterations (residual {residual:e})")]
    NotConverged {
        solver: &'static str,
        iterations: usize,
        residual: f64,
        history: Vec<f64>,
    },

    #[error("step {step} (t = {time}): {source}")]
    AtStep {
        step: usize,
        time: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("config: `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("snapshot {path}: {message}")]
    Snapshot { path: PathBuf, message: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(name: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name: name.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn at_step(self, step: usize, time: f64) -> Self {
        Error::AtStep {
            step,
            time,
            source: Box::new(self),
        }
    }

    /// Innermost error, looking through step context.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtStep { source, .. } => source.root(),
            other => other,
        }
    }

    pub fn is_solver_failure(&self) -> bool {
        matches!(
            self.root(),
            Error::NotConverged { .. } | Error::Incompatible(_)
        )
    }

    pub fn is_config_error(&self) -> bool {
        matches!(
            self.root(),
            Error::Parse { .. } | Error::Config { .. } | Error::InvalidParameter { .. }
        )
    }

    pub fn is_io_error(&self) -> bool {
        matches!(self.root(), Error::Io { .. } | Error::Snapshot { .. })
    }
}
