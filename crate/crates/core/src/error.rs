use thiserror::Error;

/// Errors shared across the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("mismatched primes: {0} vs {1}")]
    PrimeMismatch(u32, u32),

    #[error("mismatched dimensions: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("prime must be >= 2, got {0}")]
    InvalidPrime(u32),

    #[error("digit {digit} out of range for prime {prime}")]
    DigitOutOfRange { digit: u32, prime: u32 },

    #[error("working precision exceeded: operation needs digits beyond position {0}")]
    PrecisionExceeded(i64),

    #[error("grid too fine: {cells} cells exceeds cap {cap}")]
    GridTooLarge { cells: u128, cap: u128 },

    #[error("exponent range exceeded: p^{0} not representable in f64")]
    ExponentRange(f64),

    #[error("truncated decomposition tail overlaps the requested region")]
    TailAmbiguous,

    #[error("alpha = {0} outside the admissible range {1}")]
    AlphaOutOfRange(f64, &'static str),

    #[error("gamma = {0} excluded: {1}")]
    GammaExcluded(f64, &'static str),

    #[error("function must be real-valued for this operation")]
    NotRealValued,

    #[error("function support violates the required constraint: {0}")]
    SupportViolation(&'static str),

    #[error("divergent moment integral: exterior data decays too slowly")]
    DivergentMoment,

    #[error("domain not resolvable at scale {0}")]
    UnresolvableAtScale(i32),

    #[error("matrix is not positive definite (pivot {0} at index {1})")]
    NotPositiveDefinite(f64, usize),

    #[error("lambda sequence violates the quasi-geometric growth condition: {0}")]
    InvalidLambdaSequence(String),

    #[error("radial exterior data requires a family-tagged domain")]
    ExteriorUnresolvable,

    #[error("comparison hypothesis tag missing on the domain")]
    HypothesisMissing,

    #[error("degenerate input: {0}")]
    Degenerate(&'static str),

    #[error("insufficient resolved range: {got} spheres resolved, need {need}")]
    InsufficientRange { got: usize, need: usize },

    #[error("empty constraint set: {0}")]
    EmptyConstraint(&'static str),

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
