//! Generated-load CSV files and their size estimate.
//!
//! ```text
//! timestamp,load_1,load_2
//! 2021-01-01T00:00:00,1.02345,0.987654
//! ```
//!
//! Timestamps count from [`CALENDAR_START`]; values carry six significant
//! digits.

use std::io::Write;

use chrono::{NaiveDate, NaiveDateTime, TimeDelta};
use loadsynth::compose::{GenerationRequest, Synthesis};

/// Calendar instant of synthetic time zero.
pub fn calendar_start() -> NaiveDateTime {
    NaiveDate::from_ymd_opt(2021, 1, 1).expect("valid date").and_hms_opt(0, 0, 0).expect("valid time")
}

pub const CALENDAR_START: &str = "2021-01-01T00:00:00";

/// Bytes per timestamp field plus line terminator, whole-second periods.
pub const TIMESTAMP_WIDTH: u64 = 20;
/// Same with millisecond fraction, for sub-second periods.
pub const TIMESTAMP_WIDTH_MS: u64 = 24;

/// Six significant digits, fixed notation between 1e-3 and 1e7.
pub fn format_value(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 {
        "0".into()
    } else if (1e-3..1e7).contains(&a) {
        let decimals = (5 - a.log10().floor() as i32).max(0) as usize;
        format!("{v:.decimals$}")
    } else {
        format!("{v:.5e}")
    }
}

fn whole_seconds(period_s: f64) -> bool {
    (period_s - period_s.round()).abs() < 1e-9
}

pub fn format_timestamp(t_s: f64, with_millis: bool) -> String {
    let ms = (t_s * 1000.0).round() as i64;
    let t = calendar_start() + TimeDelta::milliseconds(ms);
    if with_millis {
        t.format("%Y-%m-%dT%H:%M:%S%.3f").to_string()
    } else {
        t.format("%Y-%m-%dT%H:%M:%S").to_string()
    }
}

pub fn header(n_loads: usize) -> String {
    let mut h = String::from("timestamp");
    for i in 1..=n_loads {
        h.push_str(&format!(",load_{i}"));
    }
    h.push('\n');
    h
}

pub fn write_csv<W: Write>(mut out: W, s: &Synthesis<f64>) -> std::io::Result<()> {
    out.write_all(header(s.loads.len()).as_bytes())?;
    let millis = !whole_seconds(s.period_s);
    let mut line = String::new();
    for (k, t) in s.times_s().enumerate() {
        line.clear();
        line.push_str(&format_timestamp(t, millis));
        for load in &s.loads {
            line.push(',');
            line.push_str(&format_value(load.values[k]));
        }
        line.push('\n');
        out.write_all(line.as_bytes())?;
    }
    out.flush()
}

/// Parses a file written by [`write_csv`] back into per-load columns.
pub fn read_csv(text: &str) -> Result<(Vec<String>, Vec<Vec<f64>>), String> {
    let mut lines = text.lines();
    let head = lines.next().ok_or("empty file")?;
    let cols: Vec<&str> = head.split(',').collect();
    if cols.first() != Some(&"timestamp") {
        return Err(format!("bad header `{head}`"));
    }
    let mut values = vec![Vec::new(); cols.len() - 1];
    let mut stamps = Vec::new();
    for (n, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != cols.len() {
            return Err(format!("row {} has {} fields", n + 1, fields.len()));
        }
        stamps.push(fields[0].to_string());
        for (col, f) in values.iter_mut().zip(&fields[1..]) {
            col.push(f.parse().map_err(|e| format!("row {}: {e}", n + 1))?);
        }
    }
    Ok((stamps, values))
}

/// Expected CSV size in bytes:
/// `header + rows × (timestamp width + loads × numeric width)`, where the
/// numeric width is the formatted width of `base_mw` plus one delimiter.
pub fn estimate_file_size(request: &GenerationRequest, rows: usize) -> u64 {
    let n = (request.n_residential + request.n_industrial) as u64;
    let stamp = if whole_seconds(request.resolution.effective_period_s()) { TIMESTAMP_WIDTH } else { TIMESTAMP_WIDTH_MS };
    let numeric = format_value(request.base_mw).len() as u64 + 1;
    header(n as usize).len() as u64 + rows as u64 * (stamp + n * numeric)
}
