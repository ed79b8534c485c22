use std::path::PathBuf;

use loadsynth::ingest::write_level_dir;
use loadsynth::toydata::{simulate_fleet, ToyFleetConfig};

use crate::args::SimulateArgs;
use crate::config::{fill_from, read_options};
use crate::error::CliError;
use crate::reference::{ReferenceSeries, SERIES_10MIN, SERIES_30S};

/// Days of 30-s block means kept in the 30-s reference file.
pub const REFERENCE_30S_DAYS: usize = 14;

pub fn run_simulate(mut args: SimulateArgs) -> Result<(), CliError> {
    if let Some(path) = args.config.take() {
        let file: SimulateArgs = read_options(&path)?;
        fill_from!(args, file; fleet, seed, output, write_fleet);
    }
    let out = args.output.ok_or_else(|| CliError::Usage("--output is required".into()))?;
    let fleet = match &args.fleet {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
            ToyFleetConfig::from_toml(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?
        }
        None => ToyFleetConfig::desk_default(args.seed.unwrap_or(0)),
    };
    let (loads, datasets) = simulate_fleet(&fleet).map_err(|e| CliError::Usage(e.to_string()))?;
    write_level_dir(&out, &datasets).map_err(|e| CliError::io(format!("cannot write {}", out.display()), e))?;
    let classes: Vec<_> = loads.iter().map(|l| l.config.load_class).collect();
    let blocks_30s = REFERENCE_30S_DAYS * 2880;
    let refs = [
        (SERIES_30S, 30.0, loads.iter().map(|l| l.block_means[..blocks_30s.min(l.block_means.len())].to_vec()).collect()),
        (SERIES_10MIN, 600.0, loads.iter().map(|l| l.block_mean_series(20)).collect()),
    ];
    for (name, period_s, series) in refs {
        let r = ReferenceSeries { period_s, classes: classes.clone(), series };
        let path: PathBuf = out.join(name);
        std::fs::write(&path, r.to_csv()).map_err(|e| CliError::io(format!("cannot write {}", path.display()), e))?;
    }
    if let Some(path) = &args.write_fleet {
        std::fs::write(path, fleet.to_toml()).map_err(|e| CliError::io(format!("cannot write {}", path.display()), e))?;
    }
    eprintln!(
        "simulated {} loads: {} / {} / {} / {} profiles at levels 1-4",
        loads.len(),
        datasets.l1.len(),
        datasets.l2.len(),
        datasets.l3.len(),
        datasets.l4.len()
    );
    Ok(())
}
