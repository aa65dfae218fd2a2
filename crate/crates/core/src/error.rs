use std::fmt;

/// Where a solver run blew up.
#[derive(Debug, Clone, PartialEq)]
pub struct Divergence {
    pub epoch: usize,
    pub iteration: usize,
    pub detail: String,
}

impl fmt::Display for Divergence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "diverged at epoch {} iteration {}: {}",
            self.epoch, self.iteration, self.detail
        )
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("solver {0}")]
    Diverged(Divergence),

    #[error("closed form not valid in this regime: {0}")]
    Regime(String),

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("degenerate spectrum: eigen-gap {gap:e} below tolerance")]
    DegenerateSpectrum { gap: f64 },

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("no viable step size: every grid point diverged")]
    NoViableStepSize,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
