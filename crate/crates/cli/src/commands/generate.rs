use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;

use loadsynth::compose::{synthesize, ComposeError, GenerationRequest, SeasonChoice};
use loadsynth::types::{SECONDS_PER_DAY, SECONDS_PER_WEEK, SECONDS_PER_YEAR};
use loadsynth::{parse_duration, parse_resolution, Metric, Season};

use crate::args::GenerateArgs;
use crate::bundle::{ModelBundle, DEFAULT_BUNDLE};
use crate::config::{fill_from, read_options};
use crate::error::CliError;
use crate::output::{estimate_file_size, write_csv};

/// Longest duration an explicit season may cover.
pub const MAX_SEASON_WEEKS: f64 = 13.0;

/// A parsed generate invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratePlan {
    pub bundle: PathBuf,
    pub output: Option<PathBuf>,
    pub request: GenerationRequest,
    pub rows: usize,
    pub estimate_bytes: u64,
    pub warnings: Vec<String>,
    pub estimate_only: bool,
}

fn usage(e: impl std::fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

/// Durations treated as "one year" for the season override: 52 weeks up to
/// a leap year.
fn is_full_year(duration_s: f64) -> bool {
    (SECONDS_PER_YEAR..=366.0 * SECONDS_PER_DAY).contains(&duration_s)
}

pub fn plan_generate(mut args: GenerateArgs) -> Result<GeneratePlan, CliError> {
    if let Some(path) = args.config.take() {
        let file: GenerateArgs = read_options(&path)?;
        fill_from!(args, file; bundle, residential, industrial, resolution, aggregation, length, season, base_mw, seed, output);
        args.estimate_only |= file.estimate_only;
    }
    let resolution = parse_resolution(args.resolution.as_deref().unwrap_or("1/h")).map_err(usage)?;
    let duration_s = parse_duration(args.length.as_deref().unwrap_or("1wk")).map_err(usage)?;
    let aggregation: Metric = args.aggregation.as_deref().unwrap_or("mean").parse().map_err(usage)?;
    let mut warnings = Vec::new();
    let season = match args.season.as_deref().unwrap_or("auto") {
        "auto" => SeasonChoice::AutoYearly,
        name => {
            let s: Season = name.parse().map_err(usage)?;
            if is_full_year(duration_s) {
                warnings.push(format!(
                    "season `{s}` is overridden for a full-year request; seasons follow the yearly sequence starting in winter"
                ));
                SeasonChoice::AutoYearly
            } else if duration_s > MAX_SEASON_WEEKS * SECONDS_PER_WEEK {
                return Err(usage(format!(
                    "season `{s}` cannot cover {duration_s} s (at most {MAX_SEASON_WEEKS} weeks); use --season auto"
                )));
            } else {
                SeasonChoice::Fixed(s)
            }
        }
    };
    let request = GenerationRequest {
        n_residential: args.residential.unwrap_or(1),
        n_industrial: args.industrial.unwrap_or(0),
        resolution,
        duration_s,
        season,
        aggregation,
        base_mw: args.base_mw.unwrap_or(1.0),
        seed: args.seed.unwrap_or(0),
    };
    let rows = request.rows().map_err(usage)?;
    if args.output.is_none() && !args.estimate_only {
        return Err(usage("--output is required"));
    }
    Ok(GeneratePlan {
        bundle: args.bundle.unwrap_or_else(|| PathBuf::from(DEFAULT_BUNDLE)),
        output: args.output,
        estimate_bytes: estimate_file_size(&request, rows),
        request,
        rows,
        warnings,
        estimate_only: args.estimate_only,
    })
}

/// Maps a composition failure onto the exit-code classes, naming the
/// component that failed.
fn compose_failure(e: ComposeError) -> CliError {
    let component = match &e {
        ComposeError::InvalidRequest(_) | ComposeError::DurationExceedsYear { .. } | ComposeError::RequestTooLarge { .. } => {
            return usage(e)
        }
        ComposeError::ModelMismatch(_) => return CliError::Bundle(e.to_string()),
        ComposeError::Neural(_) => "GAN generator",
        ComposeError::Svd(_) => "level 4 SVD model",
        ComposeError::InsufficientData { .. } | ComposeError::SeamTooCloseToEdge { .. } | ComposeError::InvalidFilter(_) => {
            "seam filter"
        }
        ComposeError::Core(_) => "profile scaling and resampling",
    };
    CliError::Generation { component: component.into(), message: e.to_string() }
}

pub fn run_generate(args: GenerateArgs) -> Result<GeneratePlan, CliError> {
    let plan = plan_generate(args)?;
    for w in &plan.warnings {
        eprintln!("warning: {w}");
    }
    if plan.estimate_only {
        println!("{}", plan.estimate_bytes);
        return Ok(plan);
    }
    eprintln!("estimated file size: {} bytes ({} rows)", plan.estimate_bytes, plan.rows);
    let bundle = ModelBundle::load(&plan.bundle)?;
    let out = synthesize(&plan.request, &bundle.models).map_err(compose_failure)?;
    let path = plan.output.as_ref().expect("checked in plan_generate");
    let file = File::create(path).map_err(|e| CliError::io(format!("cannot create {}", path.display()), e))?;
    write_csv(BufWriter::new(file), &out).map_err(|e| CliError::io(format!("cannot write {}", path.display()), e))?;
    Ok(plan)
}
