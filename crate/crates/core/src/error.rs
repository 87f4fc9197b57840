use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("shape mismatch: expected {expected} values, got {actual}")]
    ShapeMismatch { expected: usize, actual: usize },

    #[error("unknown model `{0}`")]
    UnknownModel(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("no real root bracketed in [{lo}, {hi}]")]
    NoRootBracketed { lo: f64, hi: f64 },

    #[error("numerical blow-up at t = {t}: max |u| = {max_abs}")]
    BlowUp { t: f64, max_abs: f64 },

    #[error("step size underflow at t = {t}: dt = {dt} fell below dt_min = {dt_min}")]
    StepUnderflow { t: f64, dt: f64, dt_min: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("{0}")]
    Insufficient(String),
}
