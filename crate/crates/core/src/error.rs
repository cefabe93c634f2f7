use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("matrix is not unitary (max deviation {0:.3e})")]
    NotUnitary(f64),
    #[error("gate is not Clifford: {0}")]
    NotClifford(String),
    #[error("channel is not CPTP: {0}")]
    NotCptp(String),
    #[error("unsupported qubit count {n}: {reason}")]
    UnsupportedQubits { n: usize, reason: &'static str },
    #[error("insufficient points for fit ({usable} usable)")]
    InsufficientPoints { usable: usize },
    #[error("missing observable {0}")]
    MissingObservable(String),
    #[error("undefined estimate: {0}")]
    UndefinedEstimate(String),
    #[error("assumption violated: {0}")]
    AssumptionViolated(String),
    #[error("numerical diagnostic: {0}")]
    Numerical(String),
    #[error("invalid config: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Errors caused by user input rather than by the numerics.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Config(_) | Error::Parse(_) | Error::Io(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
