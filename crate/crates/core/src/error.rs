use thiserror::Error;

use crate::spectra::Spectrum;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Caller violated a documented precondition.
    #[error("invalid input: {0}")]
    Usage(String),

    /// Malformed or inconsistent experiment configuration.
    #[error("config error: {0}")]
    Config(String),

    /// A numerical routine failed (bad pivot, lost orthogonality, ...).
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// An iterative eigensolver ran out of budget. The converged part is kept.
    #[error("eigensolver did not converge: {converged} of {requested} eigenpairs after {iterations} iterations")]
    NotConverged {
        requested: usize,
        converged: usize,
        iterations: usize,
        partial: Box<Spectrum>,
    },

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }

    pub(crate) fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }

    /// Wraps the error with the pipeline stage that produced it.
    pub fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// Innermost error, looking through stage wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            other => other,
        }
    }

    /// Process exit code used by the CLI: 2 for configuration/usage
    /// problems, 3 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self.root() {
            Error::Config(_) | Error::Usage(_) => 2,
            Error::Io(_) => 2,
            Error::Numerical(_) | Error::NotConverged { .. } => 3,
            Error::Stage { .. } => unreachable!(),
        }
    }
}
