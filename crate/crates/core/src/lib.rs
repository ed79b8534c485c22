//! Multi-level generative models of bus-level electrical load.
//!
//! Load measured at 30 samples/s is decomposed into four aggregation levels
//! (30 s at 30 Hz, 1 h at 1/30 s, 1 wk at 1/h, 1 yr at 1/wk). Levels 1-3 are
//! learned with GANs (level 3 conditioned on load class and season), level 4
//! with an SVD pattern model. [`compose`] recombines them into series of any
//! length and resolution.
//!
//! Numerical code is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! at the crate root fix the scalar to `f64`, which is what the file formats
//! and the command-line tool use.

pub mod compose;
pub mod error;
pub mod format;
pub mod ingest;
pub mod linalg;
pub mod neural;
pub mod poly;
pub mod resample;
pub mod resolution;
pub mod rng;
pub mod scalar;
pub mod svdgen;
pub mod toydata;
pub mod types;
pub mod validate;

pub use error::CoreError;
pub use resample::{downsample, normalize_mean, Downsampled};
pub use resolution::{parse_duration, parse_resolution, Resolution};
pub use scalar::Scalar;
pub use types::{Level, LevelSpec, LoadClass, LoadProfile, Metric, Normalization, Season};

/// Default scalar of the concrete aliases.
pub type Real = f64;

pub type Profile = types::LoadProfile<Real>;
pub type Profile32 = types::LoadProfile<f32>;
pub type GanModel = neural::GanModel<Real>;
pub type CGanModel = neural::CGanModel<Real>;
pub type SvdModel = svdgen::SvdModel<Real>;
pub type SeamFilter = compose::SeamFilter<Real>;
pub type LevelDatasets = ingest::LevelDatasets<Real>;
pub type Models = compose::Models<Real>;
