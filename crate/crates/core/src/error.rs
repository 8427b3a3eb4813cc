use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EccError {
    #[error("point is not on curve {0}")]
    PointNotOnCurve(String),
    #[error("point at infinity is not a valid input here")]
    InfinityInput,
    #[error("projective scale z must be nonzero")]
    ZeroZ,
    #[error("degenerate co-Z input: operands share an X coordinate")]
    DegenerateInput,
    #[error("scalar out of range: the ladder accepts 2 <= k < q")]
    ScalarOutOfRange,
    #[error("inversion of zero")]
    InversionOfZero,
    #[error("nonce resampling exhausted")]
    NonceExhausted,
    #[error("invalid curve parameters: {0}")]
    InvalidCurve(String),
}
