//! A small fixed-architecture neural engine and the GAN training loops for
//! levels 1-3.

mod adam;
mod arch;
mod gan;
mod layers;
mod network;

pub use adam::{Adam, AdamConfig};
pub use arch::{discriminator_spec, generator_spec};
pub use gan::{
    gan_generate, train_cgan, train_cgan_observed, train_gan, train_gan_observed, AnyGan, CGanModel, ConditionLabel,
    EpochStats, GanModel, OutputRange, TrainConfig, TrainingLog, CONDITION_DIM, D_STEPS_PER_G,
};
pub use layers::{conv1d, conv_transpose1d, sigmoid, Activation, Layer};
pub use network::{InitScheme, Network, NetworkSpec, Tape};

use thiserror::Error;

use crate::error::CoreError;
use crate::types::Level;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NeuralError {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("dataset has {have} profiles, training needs at least {need}")]
    DatasetTooSmall { have: usize, need: usize },
    #[error("training diverged (non-finite loss) in epoch {epoch}{}", if *.retried { " after retrying with a halved step" } else { "" })]
    DivergenceDetected { epoch: usize, retried: bool },
    #[error("label combinations without a full batch of examples: {}", .0.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(", "))]
    MissingLabelCoverage(Vec<ConditionLabel>),
    #[error("conditional model requires a label")]
    LabelRequired,
    #[error("unconditional model does not take a label")]
    UnexpectedLabel,
    #[error("{0} is not modeled by a GAN")]
    UnsupportedLevel(Level),
    #[error("invalid dataset: {0}")]
    InvalidDataset(String),
    #[error(transparent)]
    Core(#[from] CoreError),
}
