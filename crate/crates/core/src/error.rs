use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("non-expandable denominator: exponent {0} is not positive")]
    NonExpandable(String),
    #[error("division remainder nonzero")]
    DivisionRemainder,
    #[error("non-integral exponent {0}")]
    NonIntegralExponent(String),
    #[error("divergent product parameter: {0}")]
    Divergent(String),
    #[error("algebra mismatch: {0} vs {1}")]
    AlgebraMismatch(String, String),
    #[error("weight {0} is not dominant")]
    NotDominant(String),
    #[error("unsupported algebra {0}")]
    UnsupportedAlgebra(String),
    #[error("oracle size limit exceeded ({0})")]
    OracleSizeLimit(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("not coprime: {0},{1}")]
    NotCoprime(i64, i64),
    #[error("Jones sum not divisible")]
    JonesNotDivisible,
    #[error("minimizer inconsistency: {0}")]
    Minimizer(String),
    #[error("missing point bound violated: {0}")]
    BoundViolation(String),
    #[error("not quasi-polynomial in tested range")]
    NotQuasiPolynomial,
    #[error("c-stability not detected in range: {0}")]
    NotStable(String),
    #[error("tail evaluation failed: {0}")]
    Tail(String),
}

pub type Result<T> = std::result::Result<T, Error>;
