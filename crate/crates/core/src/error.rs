use thiserror::Error;

/// Failure modes shared by every module in the crate.
///
/// The CLI maps each variant family onto a distinct process exit code, so
/// new variants should be added to the matching `kind()` bucket.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("field of size {p}^{s} is outside the supported range (q <= {max})")]
    UnsupportedFieldSize { p: u64, s: u32, max: u64 },
    #[error("modulus {0:?} is not a monic irreducible polynomial of the stated degree")]
    BadModulus(Vec<u32>),
    #[error("element encoding {value} is out of range for a field of size {q}")]
    ElementOutOfRange { value: u64, q: u64 },
    #[error("cannot invert zero")]
    ZeroInverse,
    #[error("{t} does not divide the extension degree {s}")]
    NotADivisor { t: u32, s: u32 },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("illegal configuration: {0}")]
    IllegalConfig(String),
    #[error("size cap exceeded: {0}")]
    CapExceeded(String),
    #[error("invariant violated: {0}")]
    InvariantViolation(String),
}

/// Coarse classification used for exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    InvalidInput,
    CapExceeded,
    InvariantViolation,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::CapExceeded(_) | Error::UnsupportedFieldSize { .. } => ErrorKind::CapExceeded,
            Error::InvariantViolation(_) => ErrorKind::InvariantViolation,
            _ => ErrorKind::InvalidInput,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
