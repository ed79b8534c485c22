use std::fmt::Write as _;
use std::io::{self, Write};

use super::Spectrum;

#[derive(Debug, Clone, PartialEq)]
pub struct ReportEntry {
    pub metric: String,
    pub subject: String,
    pub value: f64,
}

/// Named metric values, emitted as CSV (`metric,subject,value`) or as an
/// aligned plain-text table.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub entries: Vec<ReportEntry>,
}

impl ValidationReport {
    pub fn push(&mut self, metric: &str, subject: &str, value: f64) {
        self.entries.push(ReportEntry { metric: metric.into(), subject: subject.into(), value });
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("metric,subject,value\n");
        for e in &self.entries {
            writeln!(s, "{},{},{}", e.metric, e.subject, e.value).unwrap();
        }
        s
    }

    pub fn to_text(&self) -> String {
        let wm = self.entries.iter().map(|e| e.metric.len()).max().unwrap_or(0).max(6);
        let ws = self.entries.iter().map(|e| e.subject.len()).max().unwrap_or(0).max(7);
        let mut s = format!("{:wm$}  {:ws$}  value\n", "metric", "subject");
        for e in &self.entries {
            writeln!(s, "{:wm$}  {:ws$}  {:.6}", e.metric, e.subject, e.value).unwrap();
        }
        s
    }
}

/// `frequency_hz,density` rows.
pub fn write_spectrum_csv<W: Write>(mut out: W, spectrum: &Spectrum) -> io::Result<()> {
    writeln!(out, "frequency_hz,density")?;
    for (f, d) in spectrum.frequencies.iter().zip(&spectrum.density) {
        writeln!(out, "{f},{d}")?;
    }
    Ok(())
}
