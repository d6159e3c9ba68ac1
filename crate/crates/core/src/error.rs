use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("point {0} is outside [0, 1)")]
    Domain(f64),
    #[error("invalid window [{lo}, {hi})")]
    InvalidWindow { lo: f64, hi: f64 },
    #[error("window [{lo}, {hi}) contains no cube of scale {scale}")]
    EmptyWindow { lo: f64, hi: f64, scale: u32 },
    #[error("point {0} is outside the family window")]
    OutOfWindow(f64),
    #[error("signal length {0} is not a power of two >= {1}")]
    Length(usize, usize),
    #[error("unknown wavelet filter `{0}`")]
    UnknownFilter(String),
    #[error("scale error: {0}")]
    Scale(String),
    #[error("oscillation order must be 1 or 2, got {0}")]
    Order(u32),
    #[error("p must be positive, got {0}")]
    NonPositiveP(f64),
    #[error("radius {radius} keeps only {cubes} cubes at scale {scale} (need {needed})")]
    RadiusTooSmall { radius: f64, cubes: usize, scale: u32, needed: usize },
    #[error("base points do not cover window [{lo}, {hi})")]
    Coverage { lo: f64, hi: f64 },
    #[error("parameter out of range: {0}")]
    Range(String),
    #[error("truncation level must be positive, got {0}")]
    Truncation(f64),
    #[error("unsupported model kind: {0}")]
    UnsupportedKind(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
