use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use loadsynth::compose::{learn_seam_filter, Models};
use loadsynth::format::Provenance;
use loadsynth::ingest::{read_level_dir, IngestError, LevelDatasets};
use loadsynth::neural::{train_cgan_observed, train_gan_observed, AdamConfig, EpochStats, NeuralError, TrainConfig, TrainingLog};
use loadsynth::rng::split_tag;
use loadsynth::svdgen::{fit_svd_model, SvdWarning};
use loadsynth::{Level, LoadClass, LoadProfile};

use crate::args::TrainArgs;
use crate::bundle::{fingerprint, ModelBundle, DEFAULT_BUNDLE};
use crate::config::{fill_from, read_options};
use crate::error::CliError;

/// Fully resolved training settings.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainSettings {
    pub data: PathBuf,
    pub output: PathBuf,
    pub log: PathBuf,
    pub seed: u64,
    pub epochs: [usize; 3],
    pub batch_size: usize,
    pub noise_dim: usize,
    pub learning_rate: f64,
    pub svd_rank: Option<usize>,
    pub quiet: bool,
}

impl TrainSettings {
    pub fn resolve(mut args: TrainArgs) -> Result<Self, CliError> {
        if let Some(path) = args.config.take() {
            let file: TrainArgs = read_options(&path)?;
            fill_from!(args, file; data, output, log, seed, epochs_l1, epochs_l2, epochs_l3, batch_size, noise_dim, learning_rate, svd_rank);
            args.quiet |= file.quiet;
        }
        let data = args.data.ok_or_else(|| CliError::Usage("--data is required".into()))?;
        let output = args.output.unwrap_or_else(|| PathBuf::from(DEFAULT_BUNDLE));
        let log = args.log.unwrap_or_else(|| with_suffix(&output, ".train.csv"));
        let s = TrainSettings {
            data,
            log,
            output,
            seed: args.seed.unwrap_or(0),
            epochs: [args.epochs_l1.unwrap_or(20), args.epochs_l2.unwrap_or(30), args.epochs_l3.unwrap_or(60)],
            batch_size: args.batch_size.unwrap_or(32),
            noise_dim: args.noise_dim.unwrap_or(100),
            learning_rate: args.learning_rate.unwrap_or(AdamConfig::default().learning_rate),
            svd_rank: args.svd_rank,
            quiet: args.quiet,
        };
        if s.batch_size == 0 || s.noise_dim == 0 || s.epochs.contains(&0) {
            return Err(CliError::Usage("epochs, batch size and noise dimension must be positive".into()));
        }
        if !(s.learning_rate.is_finite() && s.learning_rate > 0.0) {
            return Err(CliError::Usage("learning rate must be positive".into()));
        }
        Ok(s)
    }

    fn gan_config(&self, level: Level) -> TrainConfig {
        let epochs = self.epochs[level.number() as usize - 1];
        TrainConfig {
            epochs,
            batch_size: self.batch_size,
            noise_dim: self.noise_dim,
            adam: AdamConfig { learning_rate: self.learning_rate, ..AdamConfig::default() },
            ..TrainConfig::default()
        }
    }
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn missing_level(level: Level, detail: impl std::fmt::Display) -> CliError {
    CliError::MissingData(format!("{level} dataset unusable: {detail}"))
}

fn neural_error(level: Level, e: NeuralError) -> CliError {
    match e {
        NeuralError::DivergenceDetected { .. } => CliError::Divergence(format!("{level} model: {e}")),
        NeuralError::DatasetTooSmall { .. } | NeuralError::MissingLabelCoverage(_) | NeuralError::InvalidDataset(_) => {
            missing_level(level, e)
        }
        other => CliError::Io(format!("{level} model: {other}")),
    }
}

fn load_datasets(dir: &Path) -> Result<LevelDatasets<f64>, CliError> {
    read_level_dir(dir).map_err(|e| match e {
        IngestError::MissingDataset { level, path } => CliError::MissingData(format!("{level} dataset not found at {path}")),
        other => CliError::MissingData(format!("cannot read datasets in {}: {other}", dir.display())),
    })
}

/// Trains all six artifacts and writes the bundle and training log.
pub fn run_train(args: TrainArgs) -> Result<ModelBundle, CliError> {
    let s = TrainSettings::resolve(args)?;
    let ds = load_datasets(&s.data)?;
    for level in Level::ALL {
        if ds.level(level).is_empty() {
            return Err(missing_level(level, "no profiles"));
        }
    }
    let mut log = String::from("level,epoch,d_loss,g_loss,wasserstein\n");
    let mut seeds = Vec::new();

    let mut gans = Vec::new();
    for level in [Level::L1, Level::L2, Level::L3] {
        let cfg = s.gan_config(level);
        let seed = split_tag(s.seed, &format!("level {}", level.number()));
        seeds.push((level.to_string(), seed));
        let profiles = ds.profiles(level);
        let quiet = s.quiet;
        let mut observer = |e: &EpochStats| {
            if !quiet {
                let w = e.wasserstein.map_or(String::from("-"), |w| format!("{w:.5}"));
                eprintln!("{level} epoch {}/{}: d_loss {:.4} g_loss {:.4} wasserstein {w}", e.epoch + 1, cfg.epochs, e.d_loss, e.g_loss);
            }
        };
        let gan = if level == Level::L3 {
            train_cgan_observed(&profiles, level, &cfg, seed, &mut observer).map(|m| m.gan)
        } else {
            train_gan_observed(&profiles, level, &cfg, seed, &mut observer)
        }
        .map_err(|e| neural_error(level, e))?;
        append_log(&mut log, level, &gan.log);
        gans.push(gan);
    }
    let l3 = loadsynth::neural::CGanModel { gan: gans.pop().expect("three models") };
    let l2 = gans.pop().expect("three models");
    let l1 = gans.pop().expect("three models");

    let years = ds.profiles(Level::L4);
    let svd = |class: LoadClass| {
        let subset: Vec<LoadProfile<f64>> = years.iter().filter(|p| p.load_class == class).cloned().collect();
        let model = fit_svd_model(&subset, class, s.svd_rank).map_err(|e| missing_level(Level::L4, format!("{class}: {e}")))?;
        for SvdWarning::RankDeficient { index, value, largest } in &model.warnings {
            eprintln!("warning: {class} year patterns are rank deficient (singular value {index} = {value:e} of {largest:e})");
        }
        Ok::<_, CliError>(model)
    };
    let l4_residential = svd(LoadClass::MainlyResidential)?;
    let l4_industrial = svd(LoadClass::MainlyIndustrial)?;
    let seam = learn_seam_filter(&ds.profiles(Level::L3)).map_err(|e| missing_level(Level::L3, e))?;

    let mut datasets = Vec::new();
    for level in Level::ALL {
        let path = s.data.join(format!("level{}.csv", level.number()));
        datasets.push((level.to_string(), fingerprint(&path)?));
    }
    let provenance = Provenance { producer: format!("loadsynth {}", env!("CARGO_PKG_VERSION")), seeds, datasets };
    let bundle = ModelBundle { models: Models { l1, l2, l3, l4_residential, l4_industrial, seam }, provenance };
    bundle.save(&s.output)?;
    std::fs::write(&s.log, log).map_err(|e| CliError::io(format!("cannot write {}", s.log.display()), e))?;
    if !s.quiet {
        eprintln!("wrote {} and {}", s.output.display(), s.log.display());
    }
    Ok(bundle)
}

fn append_log(out: &mut String, level: Level, log: &TrainingLog) {
    for e in &log.epochs {
        let w = e.wasserstein.map_or(String::new(), |w| format!("{w:e}"));
        writeln!(out, "{},{},{:e},{:e},{w}", level.number(), e.epoch + 1, e.d_loss, e.g_loss).expect("string write");
    }
}
