//! Level datasets on disk.
//!
//! Each level is one CSV (`level{N}.csv`) with header
//! `profile_id,load_class,season,sample_index,value`, one row per sample,
//! plus a JSON sidecar (`level{N}.meta.json`) holding each profile's start
//! time, normalization scale and, for level 2, the removed trend.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{IngestError, LevelDatasets, LevelProfile};
use crate::scalar::Scalar;
use crate::types::{Level, LoadClass, LoadProfile, Season};

pub const LEVEL_CSV_HEADER: &str = "profile_id,load_class,season,sample_index,value";

#[derive(Debug, Serialize, Deserialize)]
struct ProfileMeta {
    profile_id: usize,
    start_s: f64,
    scale: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    trend: Option<[f64; 5]>,
}

pub fn write_level_csv<T: Scalar, W: Write>(out: W, profiles: &[LevelProfile<T>]) -> Result<(), IngestError> {
    let mut w = BufWriter::new(out);
    writeln!(w, "{LEVEL_CSV_HEADER}")?;
    for (id, p) in profiles.iter().enumerate() {
        let season = p.profile.season.map_or("", Season::as_str);
        let class = p.profile.load_class.as_str();
        for (k, v) in p.profile.samples.iter().enumerate() {
            // Shortest round-trip representation keeps reloads bit-exact.
            writeln!(w, "{id},{class},{season},{k},{}", v.as_f64())?;
        }
    }
    w.flush()?;
    Ok(())
}

fn write_meta<T: Scalar, W: Write>(out: W, profiles: &[LevelProfile<T>]) -> Result<(), IngestError> {
    let meta: Vec<ProfileMeta> = profiles
        .iter()
        .enumerate()
        .map(|(profile_id, p)| ProfileMeta {
            profile_id,
            start_s: p.start_s,
            scale: p.scale.as_f64(),
            trend: p.trend.map(|t| t.map(Scalar::as_f64)),
        })
        .collect();
    serde_json::to_writer_pretty(BufWriter::new(out), &meta)?;
    Ok(())
}

#[derive(Debug, Deserialize)]
struct Row {
    profile_id: usize,
    load_class: String,
    season: String,
    sample_index: usize,
    value: f64,
}

/// Reads one level CSV (without sidecar): start times and scales default
/// to zero and one.
pub fn read_level_csv<T: Scalar, R: Read>(input: R, level: Level) -> Result<Vec<LevelProfile<T>>, IngestError> {
    let mut rdr = csv::Reader::from_reader(input);
    if rdr.headers()?.iter().ne(LEVEL_CSV_HEADER.split(',')) {
        return Err(IngestError::Malformed(format!("{level} header must be `{LEVEL_CSV_HEADER}`")));
    }
    let mut grouped: BTreeMap<usize, (LoadClass, Option<Season>, Vec<T>)> = BTreeMap::new();
    for row in rdr.deserialize() {
        let row: Row = row?;
        let class: LoadClass = row.load_class.parse()?;
        let season = if row.season.is_empty() { None } else { Some(row.season.parse()?) };
        let entry = grouped.entry(row.profile_id).or_insert_with(|| (class, season, Vec::new()));
        if row.sample_index != entry.2.len() {
            return Err(IngestError::Malformed(format!(
                "{level} profile {} has sample {} out of order",
                row.profile_id, row.sample_index
            )));
        }
        entry.2.push(T::lit(row.value));
    }
    grouped
        .into_values()
        .map(|(class, season, samples)| {
            if samples.len() != level.profile_length() {
                return Err(IngestError::Malformed(format!(
                    "{level} profile has {} samples, expected {}",
                    samples.len(),
                    level.profile_length()
                )));
            }
            let profile = LoadProfile::new(samples, level.sampling_period_s(), class, season, level.normalization())?;
            Ok(LevelProfile { profile, start_s: 0.0, scale: T::one(), trend: None })
        })
        .collect()
}

pub fn write_level_dir<T: Scalar>(dir: &Path, ds: &LevelDatasets<T>) -> Result<(), IngestError> {
    std::fs::create_dir_all(dir)?;
    for level in Level::ALL {
        let n = level.number();
        write_level_csv(File::create(dir.join(format!("level{n}.csv")))?, ds.level(level))?;
        write_meta(File::create(dir.join(format!("level{n}.meta.json")))?, ds.level(level))?;
    }
    Ok(())
}

/// Loads every level present in `dir`. A missing level CSV is an error
/// naming that level; a missing sidecar is tolerated.
pub fn read_level_dir<T: Scalar>(dir: &Path) -> Result<LevelDatasets<T>, IngestError> {
    let mut ds = LevelDatasets::default();
    for level in Level::ALL {
        let n = level.number();
        let path = dir.join(format!("level{n}.csv"));
        if !path.exists() {
            return Err(IngestError::MissingDataset { level, path: path.display().to_string() });
        }
        let mut profiles = read_level_csv::<T, _>(File::open(&path)?, level)?;
        let meta_path = dir.join(format!("level{n}.meta.json"));
        if meta_path.exists() {
            let meta: Vec<ProfileMeta> = serde_json::from_reader(File::open(&meta_path)?)?;
            if meta.len() != profiles.len() {
                return Err(IngestError::Malformed(format!("{level} sidecar lists {} profiles", meta.len())));
            }
            for (p, m) in profiles.iter_mut().zip(meta) {
                p.start_s = m.start_s;
                p.scale = T::lit(m.scale);
                p.trend = m.trend.map(|t| t.map(T::lit));
            }
        }
        *ds.level_mut(level) = profiles;
    }
    ds.refresh_shortfalls("dataset file is empty");
    Ok(ds)
}
