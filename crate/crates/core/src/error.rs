use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument fell outside the domain of a mathematical function.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("validation error: {0}")]
    Validation(String),

    /// An edited polygon no longer determines a flat Gaussian.
    #[error("degenerate edit of splat {splat}: {reason}")]
    DegenerateEdit { splat: usize, reason: String },

    #[error("format error in {}: {message}", path.display())]
    Format { path: PathBuf, message: String },

    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Inputs that were supposed to come from the same state do not agree.
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("fit diverged at iteration {iteration}: loss {loss:.6e} exceeds 10x initial {initial:.6e}")]
    Divergence {
        iteration: usize,
        loss: f64,
        initial: f64,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            message: message.into(),
        }
    }
}
