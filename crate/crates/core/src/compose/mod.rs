//! Composition of generated profiles into series of any duration and
//! resolution.

mod seam;
mod synth;
mod trend;

use thiserror::Error;

use crate::error::CoreError;
use crate::neural::NeuralError;
use crate::svdgen::SvdError;
use crate::types::Level;

pub use seam::{apply_seam_filter, learn_seam_filter, seam_design, SeamFilter, CENTER_WEIGHT, MIN_TRAINING_SAMPLES};
pub use synth::{
    driving_level, synthesize, synthesize_traced, GenerationRequest, InvocationCounters, LoadTrace, Models, SeasonChoice,
    Synthesis, SyntheticLoad, MAX_DRIVING_SAMPLES, MAX_YEARS,
};
pub use trend::{add_hour_trend, add_hour_trend_at, hour_abscissa, scale_to_parent};

#[derive(Debug, Error)]
pub enum ComposeError {
    #[error("not enough interior samples to learn the seam filter: have {have}, need {need}")]
    InsufficientData { have: usize, need: usize },
    #[error("seam at index {seam} lacks two neighbors on each side in a series of length {len}")]
    SeamTooCloseToEdge { seam: usize, len: usize },
    #[error("invalid seam filter: {0}")]
    InvalidFilter(String),
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("duration {duration_s} s exceeds the supported maximum of {max_years} years")]
    DurationExceedsYear { duration_s: f64, max_years: usize },
    #[error("request needs {samples} samples per load at {level}, above the limit of {limit}")]
    RequestTooLarge { samples: u64, level: Level, limit: u64 },
    #[error("model set is inconsistent: {0}")]
    ModelMismatch(String),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error(transparent)]
    Neural(#[from] NeuralError),
    #[error(transparent)]
    Svd(#[from] SvdError),
}
