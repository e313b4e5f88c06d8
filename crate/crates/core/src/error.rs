use thiserror::Error;

/// Errors raised by the arithmetic engine and the solvers built on it.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),

    #[error("operands live in different fields: Q_{left} vs Q_{right}")]
    PrimeMismatch { left: u32, right: u32 },

    #[error("division by zero")]
    DivisionByZero,

    /// Every significant digit cancelled; the result is only known to be
    /// divisible by `p^absolute`.
    #[error("precision exhausted: result vanishes modulo p^{absolute}")]
    PrecisionExhausted { absolute: i64 },

    #[error("{function} is undefined here: {detail}")]
    DomainViolation {
        function: &'static str,
        detail: String,
    },

    #[error("Hensel lifting stalled at depth {depth}: {detail}")]
    LiftStall { depth: u32, detail: String },

    #[error("coupling is not admissible: {0}")]
    InadmissibleCoupling(String),

    #[error("boundary field is not admissible: {0}")]
    InadmissibleField(String),

    #[error("no coupling assigned to edge ending at vertex {0:?}")]
    MissingCoupling(String),

    #[error("enumeration of {terms} configurations exceeds the limit of {limit}")]
    EnumerationTooLarge { terms: u128, limit: u128 },

    #[error("partition function vanishes at working precision (known only modulo p^{absolute})")]
    PartitionFunctionDegenerate { absolute: i64 },

    #[error("denominator vanishes at working precision: {0}")]
    DenominatorDegenerate(String),

    #[error("h'-coordinates cannot be inverted: {0}")]
    NotInvertible(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
