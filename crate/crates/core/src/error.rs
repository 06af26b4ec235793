use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("register size must be at least 1")]
    EmptyRegister,

    #[error("amplitudes are not a normalized finite state (norm² = {norm_sq})")]
    NotNormalized { norm_sq: f64 },

    #[error("size mismatch: register has {register} amplitudes, marked set covers {marked}")]
    SizeMismatch { register: usize, marked: usize },

    #[error("marked index {index} out of range for bucket of size {size}")]
    IndexOutOfRange { index: usize, size: usize },

    #[error("degenerate bucket (n = {n}, marked = {marked}): both marked and unmarked classes must be non-empty")]
    Degenerate { n: usize, marked: usize },

    #[error("bucket with n = {n}, marked = {marked} exceeds 0.75 n; use classical sampling instead")]
    ClassicalRegime { n: usize, marked: usize },

    #[error("lambda = {lambda} outside the open interval (1, {upper}) for k = {k}")]
    LambdaOutOfRange { lambda: f64, upper: f64, k: usize },

    #[error("grid problem needs at least one bucket")]
    NoBuckets,

    #[error("invalid cost interval: a = {a} must be strictly below b = {b}")]
    InvalidInterval { a: f64, b: f64 },

    #[error("max_count must be positive")]
    ZeroMaxCount,

    #[error("max_rounds must be positive")]
    ZeroMaxRounds,

    #[error("search space of {size} paths exceeds enumeration cap {cap}")]
    CapExceeded { size: u128, cap: u128 },

    #[error("quadrature did not converge to {rel_tol} relative change within {max_panels} panels")]
    NonConvergence { rel_tol: f64, max_panels: usize },

    #[error("angle {theta} is a multiple of pi")]
    SingularAngle { theta: f64 },

    #[error("no finite-cost path found after {attempts} random draws")]
    NoFinitePath { attempts: usize },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
