//! Command-line grammar. Every option is optional at parse time so that an
//! option file can supply it; defaults are applied after merging.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use crate::bundle::BUNDLE_ENV;

#[derive(Debug, Parser)]
#[command(name = "loadsynth", version, about = "Synthetic bus-level load profiles from multi-level generative models")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train every model on level datasets and write a bundle.
    Train(TrainArgs),
    /// Generate load series from a trained bundle as CSV.
    Generate(GenerateArgs),
    /// Compare a bundle's output with level datasets.
    Validate(ValidateArgs),
    /// Simulate a toy fleet and write its level datasets.
    Simulate(SimulateArgs),
    /// Turn a phasor measurement CSV into level datasets.
    Ingest(IngestArgs),
}

#[derive(Debug, Default, Args, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct GenerateArgs {
    /// Option file (TOML, keys are flag names).
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Trained bundle.
    #[arg(long, env = BUNDLE_ENV)]
    pub bundle: Option<PathBuf>,
    /// Number of mainly residential loads [default: 1].
    #[arg(long)]
    pub residential: Option<usize>,
    /// Number of mainly industrial loads [default: 0].
    #[arg(long)]
    pub industrial: Option<usize>,
    /// Samples per period, e.g. `1/10min`, `1/h`, `30/s` [default: 1/h].
    #[arg(long)]
    pub resolution: Option<String>,
    /// Block aggregation when reducing resolution: mean, min or max [default: mean].
    #[arg(long)]
    pub aggregation: Option<String>,
    /// Duration, e.g. `6h`, `1d`, `1yr` [default: 1wk].
    #[arg(long)]
    pub length: Option<String>,
    /// winter, spring, summer, fall or auto [default: auto].
    #[arg(long)]
    pub season: Option<String>,
    /// Scale of the per-unit output [default: 1.0].
    #[arg(long)]
    pub base_mw: Option<f64>,
    /// Random seed [default: 0].
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output CSV path.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Print the file-size estimate and exit.
    #[arg(long)]
    #[serde(default)]
    pub estimate_only: bool,
}

#[derive(Debug, Default, Args, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct TrainArgs {
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Directory holding level1.csv ... level4.csv.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Bundle to write.
    #[arg(long, env = BUNDLE_ENV)]
    pub output: Option<PathBuf>,
    /// Training log CSV [default: <output>.train.csv].
    #[arg(long)]
    pub log: Option<PathBuf>,
    /// Base seed; each artifact trains on its own derived stream [default: 0].
    #[arg(long)]
    pub seed: Option<u64>,
    /// Epochs for the level 1 model [default: 20].
    #[arg(long)]
    pub epochs_l1: Option<usize>,
    /// Epochs for the level 2 model [default: 30].
    #[arg(long)]
    pub epochs_l2: Option<usize>,
    /// Epochs for the level 3 model [default: 60].
    #[arg(long)]
    pub epochs_l3: Option<usize>,
    /// Minibatch size [default: 32].
    #[arg(long)]
    pub batch_size: Option<usize>,
    /// Generator noise dimension [default: 100].
    #[arg(long)]
    pub noise_dim: Option<usize>,
    /// Adam step size [default: 0.0002].
    #[arg(long)]
    pub learning_rate: Option<f64>,
    /// Leading SVD patterns used for level 4 generation [default: all].
    #[arg(long)]
    pub svd_rank: Option<usize>,
    /// Suppress per-epoch progress.
    #[arg(long)]
    #[serde(default)]
    pub quiet: bool,
}

#[derive(Debug, Default, Args, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct ValidateArgs {
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Directory with the real level datasets.
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long, env = BUNDLE_ENV)]
    pub bundle: Option<PathBuf>,
    /// Real 10-minute series (as written by `simulate`) for the forecasting check.
    #[arg(long)]
    pub reference: Option<PathBuf>,
    /// Generated profiles per level [default: 500].
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Directory for report.csv, report.txt and spectrum CSVs.
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, Default, Args, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct SimulateArgs {
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Fleet description (TOML); the built-in desk fleet when absent.
    #[arg(long)]
    pub fleet: Option<PathBuf>,
    /// Seed of the built-in fleet [default: 0].
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Also write the fleet description used.
    #[arg(long)]
    pub write_fleet: Option<PathBuf>,
}

#[derive(Debug, Default, Args, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct IngestArgs {
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Phasor CSV: timestamp,line_id,v_mag,v_ang,i_mag,i_ang.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// residential or industrial.
    #[arg(long)]
    pub class: Option<String>,
    /// Absolute time of the first record in seconds since January 1st [default: first timestamp].
    #[arg(long)]
    pub start_s: Option<f64>,
    /// Output directory; existing datasets there are extended.
    #[arg(long)]
    pub output: Option<PathBuf>,
}
