use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CoreError {
    #[error("degenerate profile: mean {mean} is not above {threshold}")]
    DegenerateProfile { mean: f64, threshold: f64 },
    #[error("empty input")]
    EmptyInput,
    #[error("invalid downsampling factor {0}")]
    InvalidFactor(usize),
    #[error("parse error: {0}")]
    ParseError(String),
    #[error("resolution too fine: effective period {period_s} s is below 1/30 s")]
    ResolutionTooFine { period_s: f64 },
    #[error("invalid profile: {0}")]
    InvalidProfile(String),
}
