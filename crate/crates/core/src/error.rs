use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("requested precision too low: {0}")]
    InsufficientPrecision(String),

    #[error("evaluation point too close to the pole at s = 1")]
    PoleProximity,

    #[error("t = {t} is above the evaluation ceiling {ceiling:e}")]
    AboveCeiling { t: String, ceiling: f64 },

    #[error("cannot reach {digits} digits at this height: {reason}")]
    PrecisionUnattainable { digits: u32, reason: String },

    #[error("gap table for order {order} exhausted at q = {stranded} (delta {delta})")]
    GapTableExhausted {
        order: usize,
        stranded: String,
        delta: f64,
    },

    #[error("malformed input: {0}")]
    Format(String),

    #[error("checksum mismatch in {0}")]
    Checksum(String),

    #[error("unsupported format version {found} (expected {expected})")]
    Version { found: u32, expected: u32 },

    #[error("output directory is locked by another process: {0}")]
    Locked(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Short stable tag used on the command line and in logs.
    pub fn category(&self) -> &'static str {
        match self {
            Error::NotPrime(_) | Error::InvalidArgument(_) => "invalid-argument",
            Error::InsufficientPrecision(_) | Error::PrecisionUnattainable { .. } => "precision",
            Error::PoleProximity => "pole",
            Error::AboveCeiling { .. } => "above-ceiling",
            Error::GapTableExhausted { .. } => "gap-table-exhausted",
            Error::Format(_) => "format",
            Error::Checksum(_) => "checksum",
            Error::Version { .. } => "version",
            Error::Locked(_) => "locked",
            Error::Io(_) => "io",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
