use std::collections::BTreeSet;
use std::io::Read;

use serde::Deserialize;

use super::IngestError;
use crate::scalar::Scalar;
use crate::types::PMU_RATE_HZ;

/// Polar phasor: magnitude and angle in radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Phasor<T> {
    pub magnitude: T,
    pub angle_rad: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LineMeasurement<T> {
    pub line_id: String,
    pub voltage: Option<Phasor<T>>,
    pub current: Option<Phasor<T>>,
}

/// All line measurements at a monitored bus for one timestamp.
#[derive(Debug, Clone, PartialEq)]
pub struct PhasorRecord<T> {
    pub timestamp_s: f64,
    pub lines: Vec<LineMeasurement<T>>,
}

/// Active power drawn at the bus, per record: `Σ Re(V · conj(I))` over the
/// incident lines, positive for consumption. Units follow the input
/// (kV × kA gives MW).
pub fn compute_bus_load<T: Scalar>(records: &[PhasorRecord<T>]) -> Result<Vec<T>, IngestError> {
    let lines: BTreeSet<&str> = records
        .iter()
        .flat_map(|r| r.lines.iter().map(|l| l.line_id.as_str()))
        .collect();
    let nominal = 1.0 / PMU_RATE_HZ;
    let mut out = Vec::with_capacity(records.len());
    for (i, rec) in records.iter().enumerate() {
        if i > 0 {
            let step = rec.timestamp_s - records[i - 1].timestamp_s;
            if !(step > 0.9 * nominal && step < 1.1 * nominal) {
                return Err(IngestError::IrregularTimestamps { index: i, step_s: step });
            }
        }
        let mut p = T::zero();
        for &line in &lines {
            let m = rec.lines.iter().find(|l| l.line_id == line);
            match m.and_then(|m| m.voltage.zip(m.current)) {
                Some((v, c)) => p += v.magnitude * c.magnitude * (v.angle_rad - c.angle_rad).cos(),
                None => {
                    return Err(IngestError::MissingChannel {
                        line: line.to_string(),
                        timestamp_s: rec.timestamp_s,
                    })
                }
            }
        }
        out.push(p);
    }
    Ok(out)
}

#[derive(Debug, Deserialize)]
struct PhasorRow {
    timestamp: f64,
    line_id: String,
    v_mag: Option<f64>,
    v_ang: Option<f64>,
    i_mag: Option<f64>,
    i_ang: Option<f64>,
}

/// Reads `timestamp,line_id,v_mag,v_ang,i_mag,i_ang` rows, grouping
/// consecutive rows with equal timestamps into one record. Empty fields
/// leave the phasor absent.
pub fn read_phasor_csv<R: Read>(reader: R) -> Result<Vec<PhasorRecord<f64>>, IngestError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let expected = ["timestamp", "line_id", "v_mag", "v_ang", "i_mag", "i_ang"];
    let headers = rdr.headers()?.clone();
    if headers.iter().ne(expected.iter().copied()) {
        return Err(IngestError::Malformed(format!(
            "phasor header must be `{}`",
            expected.join(",")
        )));
    }
    let mut records: Vec<PhasorRecord<f64>> = Vec::new();
    for row in rdr.deserialize() {
        let row: PhasorRow = row?;
        let phasor = |m: Option<f64>, a: Option<f64>| m.zip(a).map(|(magnitude, angle_rad)| Phasor { magnitude, angle_rad });
        let line = LineMeasurement {
            voltage: phasor(row.v_mag, row.v_ang),
            current: phasor(row.i_mag, row.i_ang),
            line_id: row.line_id,
        };
        match records.last_mut() {
            Some(last) if last.timestamp_s == row.timestamp => last.lines.push(line),
            _ => records.push(PhasorRecord { timestamp_s: row.timestamp, lines: vec![line] }),
        }
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use std::f64::consts::PI;

    fn line(id: &str, v: (f64, f64), i: (f64, f64)) -> LineMeasurement<f64> {
        LineMeasurement {
            line_id: id.into(),
            voltage: Some(Phasor { magnitude: v.0, angle_rad: v.1 }),
            current: Some(Phasor { magnitude: i.0, angle_rad: i.1 }),
        }
    }

    fn rec(t: f64, lines: Vec<LineMeasurement<f64>>) -> PhasorRecord<f64> {
        PhasorRecord { timestamp_s: t, lines }
    }

    #[test]
    fn single_line_examples() {
        let p = compute_bus_load(&[rec(0.0, vec![line("a", (1.0, 0.0), (2.0, 0.0))])]).unwrap();
        assert!((p[0] - 2.0).abs() < 1e-15);
        let p = compute_bus_load(&[rec(0.0, vec![line("a", (1.0, 0.0), (1.0, PI))])]).unwrap();
        assert!((p[0] + 1.0).abs() < 1e-15);
    }

    #[test]
    fn two_lines_match_complex_oracle() {
        let deg = PI / 180.0;
        let lines = vec![line("a", (1.0, 0.0), (1.0, -30.0 * deg)), line("b", (1.0, 30.0 * deg), (2.0, 0.0))];
        let oracle: f64 = lines
            .iter()
            .map(|l| {
                let v = l.voltage.unwrap();
                let i = l.current.unwrap();
                (Complex64::from_polar(v.magnitude, v.angle_rad) * Complex64::from_polar(i.magnitude, i.angle_rad).conj()).re
            })
            .sum();
        // 1·cos 30° + 2·cos 30° = 3·√3/2
        assert!((oracle - 1.5 * 3f64.sqrt()).abs() < 1e-12);
        let p = compute_bus_load(&[rec(0.0, lines)]).unwrap();
        assert!((p[0] - oracle).abs() < 1e-12);
    }

    #[test]
    fn linear_in_currents() {
        let recs: Vec<_> = (0..5)
            .map(|k| rec(k as f64 / 30.0, vec![line("a", (1.1, 0.2), (0.7 + 0.1 * k as f64, -0.4)), line("b", (0.9, -0.1), (1.3, 0.5))]))
            .collect();
        let doubled: Vec<_> = recs
            .iter()
            .map(|r| PhasorRecord {
                timestamp_s: r.timestamp_s,
                lines: r
                    .lines
                    .iter()
                    .map(|l| {
                        let mut l = l.clone();
                        l.current.as_mut().unwrap().magnitude *= 2.0;
                        l
                    })
                    .collect(),
            })
            .collect();
        let a = compute_bus_load(&recs).unwrap();
        let b = compute_bus_load(&doubled).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(2.0 * x, *y);
        }
    }

    #[test]
    fn missing_channel_and_bad_timestamps() {
        let mut missing = line("b", (1.0, 0.0), (1.0, 0.0));
        missing.current = None;
        let recs = vec![
            rec(0.0, vec![line("a", (1.0, 0.0), (1.0, 0.0)), line("b", (1.0, 0.0), (1.0, 0.0))]),
            rec(1.0 / 30.0, vec![line("a", (1.0, 0.0), (1.0, 0.0)), missing]),
        ];
        assert!(matches!(compute_bus_load(&recs), Err(IngestError::MissingChannel { line, .. }) if line == "b"));
        let recs = vec![
            rec(0.0, vec![line("a", (1.0, 0.0), (1.0, 0.0))]),
            rec(0.0, vec![line("a", (1.0, 0.0), (1.0, 0.0))]),
        ];
        assert!(matches!(compute_bus_load(&recs), Err(IngestError::IrregularTimestamps { index: 1, .. })));
    }

    #[test]
    fn reads_csv_and_groups_by_timestamp() {
        let text = "timestamp,line_id,v_mag,v_ang,i_mag,i_ang\n\
                    0,a,1,0,2,0\n0,b,1,0,1,0\n0.0333333333,a,1,0,2,0\n0.0333333333,b,,,1,0\n";
        let recs = read_phasor_csv(text.as_bytes()).unwrap();
        assert_eq!(recs.len(), 2);
        assert_eq!(recs[0].lines.len(), 2);
        assert!(recs[1].lines[1].voltage.is_none());
        assert!(matches!(compute_bus_load(&recs), Err(IngestError::MissingChannel { .. })));
        assert!(read_phasor_csv("t,line\n".as_bytes()).is_err());
    }
}
