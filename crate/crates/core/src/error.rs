use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Everything that can go wrong in the completion pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is not positive definite: {0}")]
    NotPositiveDefinite(String),

    /// The visible block of an input kernel is not positive definite.
    #[error("visible block of view {view} is not positive definite")]
    VisibleBlockNotPd { view: usize },

    #[error("numerical failure in {context}: {detail}")]
    Numerical { context: String, detail: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("iteration {iteration}{}: {source}", view.map(|v| format!(", view {v}")).unwrap_or_default())]
    AtIteration {
        iteration: usize,
        view: Option<usize>,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
}

impl Error {
    pub(crate) fn numerical(context: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::Numerical {
            context: context.into(),
            detail: detail.into(),
        }
    }

    pub(crate) fn at(self, iteration: usize, view: Option<usize>) -> Self {
        Error::AtIteration {
            iteration,
            view,
            source: Box::new(self),
        }
    }

    /// Strips iteration annotations.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtIteration { source, .. } => source.root(),
            other => other,
        }
    }

    /// Process exit code for the command-line front end.
    ///
    /// `2` for IO, parse and argument failures, `3` for shape and mask mismatches,
    /// `4` for a non-positive-definite visible block, `1` for anything else.
    pub fn exit_code(&self) -> i32 {
        match self.root() {
            Error::Io { .. } | Error::Parse { .. } | Error::InvalidArgument(_) => 2,
            Error::Dimension(_) => 3,
            Error::VisibleBlockNotPd { .. } => 4,
            _ => 1,
        }
    }
}
