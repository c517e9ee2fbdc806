use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("Mittag-Leffler evaluation did not reach tolerance: {0}")]
    NonConvergence(String),

    #[error("unknown spectrum `{0}`")]
    UnknownSpectrum(String),

    #[error("invalid truncation N = {0}, need N >= 1")]
    InvalidTruncation(usize),

    #[error("numeric overflow: {0}")]
    NumericOverflow(String),

    #[error("quadrature self-estimate failed: {0}")]
    QuadratureFailure(String),

    #[error("regime mismatch: {0}")]
    RegimeMismatch(String),

    #[error("missing source derivative: {0}")]
    MissingDerivative(String),

    #[error("denominator 1 - E(-rho T^alpha) = {value:e} below floor {floor:e}")]
    DenominatorUnderflow { value: f64, floor: f64 },

    #[error("alpha = {0} outside (0, 1)")]
    InvalidAlpha(f64),

    #[error("need at least 3 geometric refinements, got {0}")]
    InsufficientRefinements(usize),

    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    #[error("mode {mode}: {source}")]
    Mode { mode: usize, source: Box<Error> },
}

impl Error {
    /// Attach a 1-based mode index.
    pub fn at_mode(self, mode: usize) -> Self {
        match self {
            e @ Error::Mode { .. } => e,
            e => Error::Mode { mode, source: Box::new(e) },
        }
    }

    /// The innermost error, with any mode annotation stripped.
    pub fn root(&self) -> &Error {
        match self {
            Error::Mode { source, .. } => source.root(),
            e => e,
        }
    }

    pub fn mode(&self) -> Option<usize> {
        match self {
            Error::Mode { mode, .. } => Some(*mode),
            _ => None,
        }
    }
}
