//! Error type shared across the library.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("field spec mismatch: operands belong to different fields")]
    SpecMismatch,
    #[error("{0} is not prime or out of the supported range 2..=17")]
    BadPrime(u32),
    #[error("invalid field spec: {0}")]
    BadFieldSpec(String),
    #[error("division by zero in K")]
    DivisionByZero,
    #[error("gcd of two zero polynomials is undefined")]
    ZeroGcd,
    #[error("element is not a p^{0}-th power in K")]
    NotAPower(u32),
    #[error("budget exceeded: computation needs dimension {needed}, cap is {cap}")]
    BudgetExceeded { needed: usize, cap: usize },
    #[error("ambient dimension mismatch in subspace operation")]
    DimensionMismatch,
    #[error("levels do not form a power tower: W_{j} != W_{i} * K^(p^{j})")]
    NotAPowerTower { i: usize, j: usize },
    #[error("candidate pool cannot be completed to a p-basis (got {got}, need {need})")]
    PoolInsufficient { got: usize, need: usize },
    #[error("element does not lie in the given subfield")]
    NotInSubfield,
    #[error("Jacobson dimension law violated: p^rank = {expected} but degree is {got}")]
    DimensionLawViolation { expected: u64, got: u64 },
    #[error("extension is not of exponent at most one")]
    NotExponentOne,
    #[error("unpacking disagrees with the iterated tangent sequence at level {0}")]
    MismatchAtLevel(usize),
    #[error("no completing set of transcendentals found in the candidate pool")]
    SearchExhausted,
    #[error("parse error at {line}:{col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },
    #[error("script error at {line}:{col}: {msg}")]
    Script { line: usize, col: usize, msg: String },
    #[error("assertion failed: {0}")]
    AssertionFailed(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
