use thiserror::Error;

/// Errors raised by the arithmetic, counting and evaluation layers.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("modulus mismatch: {0} vs {1}")]
    ModulusMismatch(String, String),
    #[error("field mismatch")]
    FieldMismatch,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("modulus {p}^{k} does not fit the 32-bit ring representation")]
    ModulusTooLarge { p: u64, k: u32 },
    #[error("{value} is not a unit modulo {modulus}")]
    NotAUnit { value: u64, modulus: u64 },
    #[error("matrix is not invertible modulo p")]
    NotInvertible,
    #[error("division by zero in a finite field")]
    DivisionByZero,
    #[error("operation requires odd characteristic")]
    EvenCharacteristic,
    #[error("enumeration of {candidates} candidates exceeds the limit {limit}")]
    TooLarge { candidates: u128, limit: u128 },
    #[error("matrix is not regular semisimple modulo p")]
    NotRegularSemisimple,
    #[error("square root has two eigenvalues summing to zero; Hensel lifting is not unique")]
    SingularLift,
    #[error("A and B are both zero modulo p^k")]
    BothZero,
    #[error("coefficient vector is not divisible by {0}")]
    InexactDivision(String),
    #[error("malformed primary component: {0}")]
    MalformedComponent(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
