use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("p^m = {p}^{m} does not fit in 64 bits")]
    ModulusOverflow { p: u64, m: u32 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("ring context mismatch")]
    ContextMismatch,
    #[error("{value} is not in U_{level} modulo {modulus}")]
    NotInUnitFiltration { value: u64, level: u32, modulus: u64 },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("no decomposition found within a budget of {0} candidates")]
    BudgetExhausted(usize),
    #[error("inconsistent with the closed-form prediction: {0}")]
    Inconsistency(String),
    #[error("too large: {0}")]
    TooLarge(String),
}

pub type Result<T> = std::result::Result<T, Error>;
