use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("modulus {0} is not prime")]
    NotPrime(u64),
    #[error("{0} has no inverse modulo {1}")]
    NoInverse(u64, u32),
    #[error("entry {value} at ({row}, {col}) is outside [0, {q})")]
    EntryOutOfRange { row: usize, col: usize, value: u32, q: u32 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("operation needs two distinct sites, got {0} twice")]
    SameSite(usize),
    #[error("site {site} out of range for {n} sites")]
    SiteOutOfRange { site: usize, n: usize },
    #[error("matrix does not preserve the symplectic form mod {0}")]
    NotSymplectic(u32),
    #[error("invalid stabilizer tableau: {0}")]
    InvalidTableau(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("fit failed: {0}")]
    Fit(String),
}

pub type Result<T> = std::result::Result<T, Error>;
