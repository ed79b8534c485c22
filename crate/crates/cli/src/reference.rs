//! Reference ("real") series written by `simulate` and read by `validate`.
//!
//! ```text
//! time_s,residential_1,industrial_2
//! 0,101.234,88.0012
//! 600,101.567,87.9934
//! ```
//!
//! One column per load, named `<class>_<n>` with `n` counting loads from 1;
//! `time_s` is seconds since January 1st of year 0. Values use the shortest
//! representation that reloads bit-exactly.

use std::fmt::Write as _;
use std::path::Path;

use loadsynth::LoadClass;

use crate::error::CliError;

pub const SERIES_30S: &str = "series_30s.csv";
pub const SERIES_10MIN: &str = "series_10min.csv";

#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceSeries {
    pub period_s: f64,
    pub classes: Vec<LoadClass>,
    /// One series per load, equal lengths.
    pub series: Vec<Vec<f64>>,
}

impl ReferenceSeries {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("time_s");
        for (i, c) in self.classes.iter().enumerate() {
            write!(s, ",{c}_{}", i + 1).expect("string write");
        }
        s.push('\n');
        let rows = self.series.first().map_or(0, Vec::len);
        for k in 0..rows {
            write!(s, "{}", k as f64 * self.period_s).expect("string write");
            for col in &self.series {
                write!(s, ",{}", col[k]).expect("string write");
            }
            s.push('\n');
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let mut lines = text.lines();
        let head = lines.next().ok_or("empty reference file")?;
        let mut cols = head.split(',');
        if cols.next() != Some("time_s") {
            return Err(format!("bad reference header `{head}`"));
        }
        let classes = cols
            .map(|c| c.rsplit_once('_').and_then(|(class, _)| class.parse().ok()).ok_or(format!("bad column `{c}`")))
            .collect::<Result<Vec<LoadClass>, _>>()?;
        let mut series = vec![Vec::new(); classes.len()];
        let mut times = Vec::new();
        for (n, line) in lines.enumerate() {
            let mut f = line.split(',');
            let t: f64 = f.next().and_then(|v| v.parse().ok()).ok_or(format!("row {}: bad time", n + 1))?;
            times.push(t);
            for col in series.iter_mut() {
                col.push(f.next().and_then(|v| v.parse().ok()).ok_or(format!("row {}: bad value", n + 1))?);
            }
        }
        let period_s = if times.len() > 1 { times[1] - times[0] } else { 0.0 };
        Ok(Self { period_s, classes, series })
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::MissingData(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| CliError::MissingData(format!("{}: {e}", path.display())))
    }
}
