//! Turning measured load into the four normalized training datasets.

mod io;
mod levels;
mod phasor;

pub use io::{read_level_dir, read_level_csv, write_level_csv, write_level_dir, LEVEL_CSV_HEADER};
pub use levels::{
    detrend_hour, extract_from_block_means, extract_level_datasets, LevelDatasets, LevelProfile,
    DETREND_CENTER, DETREND_WINDOW,
};
pub use phasor::{compute_bus_load, read_phasor_csv, LineMeasurement, Phasor, PhasorRecord};

use thiserror::Error;

use crate::types::Level;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("missing phasor channel for line `{line}` at t = {timestamp_s} s")]
    MissingChannel { line: String, timestamp_s: f64 },
    #[error("irregular timestamps at record {index}: step {step_s} s is not within 10% of 1/30 s")]
    IrregularTimestamps { index: usize, step_s: f64 },
    #[error("insufficient data for {level}: {reason}")]
    InsufficientData { level: Level, reason: String },
    #[error("detrending window has {0} samples, expected 600")]
    WindowTooShort(usize),
    #[error("start time {0} s is not on the 1/30 s grid")]
    MisalignedStart(f64),
    #[error("dataset for {level} not found at {path}")]
    MissingDataset { level: Level, path: String },
    #[error("malformed dataset: {0}")]
    Malformed(String),
    #[error(transparent)]
    Core(#[from] crate::error::CoreError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
