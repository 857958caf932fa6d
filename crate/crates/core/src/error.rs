use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("point {point:?} lies outside the domain of {what}")]
    OutsideDomain { what: &'static str, point: Vec<f64> },

    #[error("non-finite coordinate in {0:?}")]
    NonFinite(Vec<f64>),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid group data: {0}")]
    InvalidGroup(String),

    #[error("evaluation of {what} failed at {point:?}: {reason}")]
    Evaluation {
        what: String,
        point: Vec<f64>,
        reason: String,
    },

    #[error("no informative pairs: all {0} sampled pairs were degenerate")]
    NoInformativePairs(usize),

    #[error("empty punctured ball sample at radius {radius}")]
    EmptyBall { radius: f64 },

    #[error("exponent undefined: {base}^{exponent}")]
    ExponentUndefined { base: f64, exponent: f64 },

    #[error("quasi-linearity violated at {point:?} (residual {residual:e})")]
    QuasiLinearityViolated { point: Vec<f64>, residual: f64 },

    #[error("{0} is not supported by this quotient")]
    Unsupported(&'static str),

    #[error("compatibility fails at a = {a:?}, b = {b:?}: per-layer defects {defects:?}")]
    CompatibilityViolated { a: Vec<f64>, b: Vec<f64>, defects: Vec<f64> },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("internal consistency error: {0}")]
    Consistency(String),
}
