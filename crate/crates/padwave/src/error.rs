use thiserror::Error;

/// Errors surfaced by exact p-adic computations.
///
/// Precision problems are always reported, never silently truncated: an
/// operation that would need digits outside the known window of an operand
/// fails with [`Error::InsufficientPrecision`] or
/// [`Error::IndeterminateValuation`] so the caller can re-parse the input
/// with a wider window.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u32),

    #[error("prime mismatch: {left} vs {right}")]
    PrimeMismatch { left: u32, right: u32 },

    #[error("zero denominator")]
    ZeroDenominator,

    #[error("division by zero")]
    DivisionByZero,

    #[error("valuation is indeterminate: the value is zero to precision (mod {prime}^{precision}); raise the precision")]
    IndeterminateValuation { prime: u32, precision: i64 },

    #[error("insufficient precision: digits at position {position} are unknown (known below {known_below})")]
    InsufficientPrecision { position: i64, known_below: i64 },

    #[error("digit {digit} out of range for prime {prime}")]
    DigitOutOfRange { digit: u32, prime: u32 },

    #[error("cannot parse p-adic literal {literal:?}: {reason}")]
    ParseLiteral { literal: String, reason: String },

    #[error("wavelet index j={j} out of range 1..={max}")]
    IndexOutOfRange { j: u32, max: u32 },

    #[error("cannot refine to scale {requested}: coarser than current scale {current}")]
    CoarserScale { requested: i64, current: i64 },

    #[error(
        "the value has an infinite digit expansion; only finite expansions map to the half-line"
    )]
    InfiniteExpansion,

    #[error("denominator is not a power of {prime}")]
    NotPPowerDenominator { prime: u32 },

    #[error("negative values have no preimage on the half-line")]
    NegativeReal,

    #[error("invalid function file: {0}")]
    FunctionFile(String),

    #[error("exponent must be positive, got {0}")]
    NonPositiveExponent(f64),
}

pub type Result<T> = std::result::Result<T, Error>;
