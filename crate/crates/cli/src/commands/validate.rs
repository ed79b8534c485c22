use std::fs::File;
use std::path::{Path, PathBuf};

use loadsynth::compose::{synthesize, GenerationRequest, SeasonChoice};
use loadsynth::ingest::{read_level_dir, LevelDatasets, LevelProfile};
use loadsynth::neural::ConditionLabel;
use loadsynth::rng::{split, split_tag};
use loadsynth::validate::{
    ar_forecast_eval, log_psd_gap_db, mean_log_psd, seam_stats, wasserstein_1d, write_spectrum_csv, SeamStats,
    ValidationReport, DEFAULT_LAGS,
};
use loadsynth::{parse_resolution, Level, LoadClass, LoadProfile, Models, Season};

use crate::args::ValidateArgs;
use crate::bundle::{ModelBundle, DEFAULT_BUNDLE};
use crate::config::{fill_from, read_options};
use crate::error::CliError;
use crate::reference::{ReferenceSeries, SERIES_10MIN, SERIES_30S};

/// Upper edge of the band compared for level 1 spectra.
pub const L1_PSD_BAND_HZ: f64 = 1.0;
/// Seams measured per generated series.
const GENERATED_SEAM_WINDOWS: usize = 40;

fn failed(what: &str) -> impl Fn(String) -> CliError + '_ {
    move |e| CliError::Generation { component: what.to_string(), message: e }
}

pub fn pooled<T: Copy + Into<f64>>(profiles: &[LoadProfile<T>]) -> Vec<f64> {
    profiles.iter().flat_map(|p| p.samples.iter().map(|&v| v.into())).collect()
}

/// Evenly spaced subset of at most `n` profiles.
fn subsample(profiles: &[LevelProfile<f64>], n: usize) -> Vec<LoadProfile<f64>> {
    let step = (profiles.len() as f64 / n.max(1) as f64).max(1.0);
    (0..n.min(profiles.len())).map(|i| profiles[(i as f64 * step) as usize].profile.clone()).collect()
}

/// Seams between consecutive level 1 windows of the same span, in absolute units.
pub fn dataset_l1_seams(profiles: &[LevelProfile<f64>]) -> Option<SeamStats> {
    let mut series = Vec::new();
    let mut seams = Vec::new();
    for pair in profiles.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        if (b.start_s - a.start_s - 30.0).abs() < 1e-6 && a.profile.load_class == b.profile.load_class {
            series.extend([*a.profile.samples.last()? * a.scale, b.profile.samples[0] * b.scale]);
            seams.push(series.len() - 2);
        }
    }
    seam_stats(&series, &seams).ok()
}

/// Seams every `block` samples of each series.
pub fn block_seams(series: &[Vec<f64>], block: usize) -> Option<SeamStats> {
    let mut all = Vec::new();
    let mut seams = Vec::new();
    for s in series {
        let base = all.len();
        seams.extend((1..s.len() / block).map(|k| base + k * block - 1));
        all.extend_from_slice(s);
    }
    seam_stats(&all, &seams).ok()
}

fn seam_request(resolution: &str, windows: usize, span_s: f64, seed: u64) -> GenerationRequest {
    let mut r = GenerationRequest::new(1, 1, parse_resolution(resolution).expect("valid literal"), windows as f64 * span_s, seed);
    r.season = SeasonChoice::Fixed(Season::Winter);
    r
}

/// Composed series at a level's own resolution, one per load.
pub fn generated_level_series(models: &Models, level: Level, windows: usize, seed: u64) -> Result<Vec<Vec<f64>>, CliError> {
    let res = match level {
        Level::L1 => "30/s",
        Level::L2 => "1/30s",
        _ => "1/h",
    };
    let out = synthesize(&seam_request(res, windows, level.span_s(), seed), models).map_err(|e| failed("composition")(e.to_string()))?;
    Ok(out.loads.into_iter().map(|l| l.values).collect())
}

fn write_report_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::io(format!("cannot write {}", path.display()), e))
}

pub fn run_validate(mut args: ValidateArgs) -> Result<ValidationReport, CliError> {
    if let Some(path) = args.config.take() {
        let file: ValidateArgs = read_options(&path)?;
        fill_from!(args, file; data, bundle, reference, samples, seed, output_dir);
    }
    let data = args.data.ok_or_else(|| CliError::Usage("--data is required".into()))?;
    let out_dir = args.output_dir.ok_or_else(|| CliError::Usage("--output-dir is required".into()))?;
    let bundle = ModelBundle::load(&args.bundle.unwrap_or_else(|| PathBuf::from(DEFAULT_BUNDLE)))?;
    let ds: LevelDatasets<f64> =
        read_level_dir(&data).map_err(|e| CliError::MissingData(format!("cannot read datasets in {}: {e}", data.display())))?;
    let n = args.samples.unwrap_or(500);
    let seed = args.seed.unwrap_or(0);
    std::fs::create_dir_all(&out_dir).map_err(|e| CliError::io(format!("cannot create {}", out_dir.display()), e))?;
    let m = &bundle.models;
    let mut report = ValidationReport::default();

    // Amplitude distributions and spectra, levels 1 and 2.
    for (level, gan) in [(Level::L1, &m.l1), (Level::L2, &m.l2)] {
        let real = subsample(ds.level(level), n);
        if real.is_empty() {
            continue;
        }
        let generated = gan.generate(real.len(), split_tag(seed, &level.to_string())).map_err(|e| failed("GAN generator")(e.to_string()))?;
        let w = wasserstein_1d(&pooled(&real), &pooled(&generated)).map_err(|e| failed("metrics")(e.to_string()))?;
        report.push("wasserstein", &format!("level{}", level.number()), w);
        let (sr, sg) = (mean_log_psd(&real), mean_log_psd(&generated));
        if let (Ok(sr), Ok(sg)) = (sr, sg) {
            let band = if level == Level::L1 { L1_PSD_BAND_HZ } else { f64::INFINITY };
            report.push("log_psd_gap_db", &format!("level{}", level.number()), log_psd_gap_db(&sr, &sg, band));
            for (tag, s) in [("real", &sr), ("generated", &sg)] {
                let path = out_dir.join(format!("psd_level{}_{tag}.csv", level.number()));
                let file = File::create(&path).map_err(|e| CliError::io(format!("cannot create {}", path.display()), e))?;
                write_spectrum_csv(file, s).map_err(|e| CliError::io(format!("cannot write {}", path.display()), e))?;
            }
        }
    }

    // Level 3 per label, level 4 per class.
    for label in ConditionLabel::all() {
        let real: Vec<_> = ds
            .l3
            .iter()
            .filter(|p| p.profile.load_class == label.load_class && p.profile.season == Some(label.season))
            .map(|p| p.profile.clone())
            .collect();
        if real.is_empty() {
            continue;
        }
        let generated = m
            .l3
            .generate(real.len().min(n), split(split_tag(seed, "level 3"), label.season.index() as u64 * 2 + label.load_class.index() as u64), label)
            .map_err(|e| failed("GAN generator")(e.to_string()))?;
        let w = wasserstein_1d(&pooled(&real), &pooled(&generated)).map_err(|e| failed("metrics")(e.to_string()))?;
        report.push("wasserstein", &format!("level3 {label}"), w);
    }
    for class in LoadClass::ALL {
        let real: Vec<_> = ds.l4.iter().filter(|p| p.profile.load_class == class).map(|p| p.profile.clone()).collect();
        if real.is_empty() {
            continue;
        }
        let generated = m.l4(class).generate(n, split_tag(seed, "level 4"));
        let w = wasserstein_1d(&pooled(&real), &pooled(&generated)).map_err(|e| failed("metrics")(e.to_string()))?;
        report.push("wasserstein", &format!("level4 {class}"), w);
    }

    // Seams.
    let gen_l1 = generated_level_series(m, Level::L1, GENERATED_SEAM_WINDOWS, split_tag(seed, "seams 1"))?;
    let gen_l2 = generated_level_series(m, Level::L2, GENERATED_SEAM_WINDOWS, split_tag(seed, "seams 2"))?;
    let mut push_seams = |subject: &str, s: Option<SeamStats>| {
        if let Some(s) = s {
            report.push("seam_mean_pct", subject, s.mean_pct);
            report.push("seam_std_pct", subject, s.std_pct);
        }
    };
    push_seams("level1 real", dataset_l1_seams(&ds.l1));
    push_seams("level1 generated", block_seams(&gen_l1, Level::L1.profile_length()));
    if let Some(dir) = &args.reference {
        let r = ReferenceSeries::read(&dir.join(SERIES_30S))?;
        push_seams("level2 real", block_seams(&r.series, Level::L2.profile_length()));
    }
    push_seams("level2 generated", block_seams(&gen_l2, Level::L2.profile_length()));

    // Forecasting transfer.
    if let Some(dir) = &args.reference {
        let real = ReferenceSeries::read(&dir.join(SERIES_10MIN))?;
        let (train_real, test_real) = split_halves(&real.series);
        let weeks = (train_real.first().map_or(0, Vec::len) / 1008).clamp(1, 8);
        let n_res = real.classes.iter().filter(|c| **c == LoadClass::MainlyResidential).count();
        let mut req = GenerationRequest::new(n_res, real.classes.len() - n_res, parse_resolution("1/10min").expect("valid"), weeks as f64 * 604_800.0, split_tag(seed, "forecast"));
        req.season = SeasonChoice::AutoYearly;
        let generated = synthesize(&req, m).map_err(|e| failed("composition")(e.to_string()))?;
        let gen_series: Vec<Vec<f64>> = generated.loads.into_iter().map(|l| l.values).collect();
        let eval = |train: &[Vec<f64>], tag: &str| {
            ar_forecast_eval(train, &test_real, DEFAULT_LAGS).map(|r| r.tagged(tag, "real")).map_err(|e| failed("forecaster")(e.to_string()))
        };
        let on_real = eval(&train_real, "real")?;
        let on_gen = eval(&gen_series, "generated")?;
        for r in [on_real, on_gen] {
            report.push("forecast_mape_pct", &format!("train {} test {}", r.train_source, r.test_source), r.mean_ape_pct);
            report.push("forecast_sdape_pct", &format!("train {} test {}", r.train_source, r.test_source), r.std_ape_pct);
        }
    }

    write_report_file(&out_dir.join("report.csv"), &report.to_csv())?;
    write_report_file(&out_dir.join("report.txt"), &report.to_text())?;
    print!("{}", report.to_text());
    Ok(report)
}

/// First and second half of every series.
pub fn split_halves(series: &[Vec<f64>]) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    series.iter().map(|s| (s[..s.len() / 2].to_vec(), s[s.len() / 2..].to_vec())).unzip()
}
