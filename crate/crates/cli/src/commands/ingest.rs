use std::fs::File;

use loadsynth::ingest::{compute_bus_load, extract_level_datasets, read_level_dir, read_phasor_csv, write_level_dir};
use loadsynth::LoadClass;

use crate::args::IngestArgs;
use crate::config::{fill_from, read_options};
use crate::error::CliError;

pub fn run_ingest(mut args: IngestArgs) -> Result<(), CliError> {
    if let Some(path) = args.config.take() {
        let file: IngestArgs = read_options(&path)?;
        fill_from!(args, file; input, class, start_s, output);
    }
    let input = args.input.ok_or_else(|| CliError::Usage("--input is required".into()))?;
    let out = args.output.ok_or_else(|| CliError::Usage("--output is required".into()))?;
    let class: LoadClass = args
        .class
        .as_deref()
        .ok_or_else(|| CliError::Usage("--class is required".into()))?
        .parse()
        .map_err(|e: loadsynth::CoreError| CliError::Usage(e.to_string()))?;
    let file = File::open(&input).map_err(|e| CliError::MissingData(format!("cannot read {}: {e}", input.display())))?;
    let records = read_phasor_csv(file).map_err(|e| CliError::MissingData(format!("{}: {e}", input.display())))?;
    let start_s = args.start_s.or(records.first().map(|r| r.timestamp_s)).unwrap_or(0.0);
    let load = compute_bus_load(&records).map_err(|e| CliError::MissingData(format!("{}: {e}", input.display())))?;
    let mut ds = extract_level_datasets(&load, start_s, class).map_err(|e| CliError::MissingData(e.to_string()))?;
    for short in &ds.shortfalls {
        eprintln!("warning: {short}");
    }
    if out.join("level1.csv").exists() {
        let mut existing = read_level_dir(&out).map_err(|e| CliError::MissingData(format!("{}: {e}", out.display())))?;
        existing.merge(ds);
        ds = existing;
    }
    write_level_dir(&out, &ds).map_err(|e| CliError::io(format!("cannot write {}", out.display()), e))?;
    eprintln!("{} / {} / {} / {} profiles at levels 1-4", ds.l1.len(), ds.l2.len(), ds.l3.len(), ds.l4.len());
    Ok(())
}
