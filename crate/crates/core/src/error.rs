use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RubanError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("{d} is not a square in Q_{p}")]
    NotASquare { d: String, p: u64 },
    #[error("{0} is a perfect square in Z")]
    PerfectSquare(String),
    #[error("precision must be at least 1")]
    InvalidPrecision,
    #[error("expansion did not terminate within {steps} steps")]
    BudgetExceeded { steps: usize },
    #[error("hensel precision {precision} exceeds the configured cap {cap}")]
    PrecisionOverflow { precision: u32, cap: u32 },
    #[error("zero denominator while evaluating a continued fraction")]
    ZeroDenominator,
    #[error("degenerate periodic value: {0}")]
    Degenerate(String),
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),
    #[error("inconsistent quasi-periodic specification: {0}")]
    SpecInconsistent(String),
    #[error("invalid partial quotient {value} at index {index}: {reason}")]
    InvalidQuotient {
        index: usize,
        value: String,
        reason: &'static str,
    },
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, RubanError>;
