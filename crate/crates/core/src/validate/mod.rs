//! Fidelity metrics comparing generated and real load data.

mod forecast;
mod psd;
mod report;
mod seams;
mod wasserstein;

pub use forecast::{absolute_percentage_errors, ar_forecast_eval, fit_ar, ArModel, ForecastReport, AR_RIDGE, DEFAULT_LAGS, MIN_PREDICTIONS};
pub use psd::{log_psd_gap_db, mean_log_psd, periodogram, psd, Spectrum};
pub use report::{write_spectrum_csv, ReportEntry, ValidationReport};
pub use seams::{seam_stats, SeamStats};
pub use wasserstein::{wasserstein_1d, wasserstein_exact, wasserstein_histogram, HISTOGRAM_BINS};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ValidateError {
    #[error("empty input")]
    EmptyInput,
    #[error("profiles have different sampling periods")]
    MixedSamplingPeriods,
    #[error("profiles have different lengths")]
    MixedLengths,
    #[error("no seams given")]
    NoSeams,
    #[error("seam at {index} has no following sample")]
    SeamOutOfRange { index: usize },
    #[error("series is not positive at seam {index}")]
    NonPositiveAtSeam { index: usize },
    #[error("series of {len} samples is too short for {lags} lags")]
    SeriesTooShort { len: usize, lags: usize },
    #[error("only {0} test predictions, at least {MIN_PREDICTIONS} needed")]
    TooFewPredictions(usize),
    #[error("autoregressive normal equations are singular")]
    Singular,
}
