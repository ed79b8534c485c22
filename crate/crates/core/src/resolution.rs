//! Resolution and duration grammars.
//!
//! A resolution is written `<count>/[<n>]<unit>`, for example `1/10min` or
//! `30/s`. A duration is `<n><unit>`, for example `6h` or `1yr`. Units are
//! `s`, `min`, `h`, `d`, `wk`, plus `yr` (52 weeks) for durations. Input is
//! ASCII, case-sensitive and may not contain whitespace.

use crate::error::CoreError;
use crate::types::PMU_RATE_HZ;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Resolution {
    pub samples_per_period: u64,
    pub period_s: f64,
}

impl Resolution {
    pub fn effective_period_s(&self) -> f64 {
        self.period_s / self.samples_per_period as f64
    }

    /// Effective period as a whole number of 1/30 s ticks, when it is one.
    pub fn period_ticks(&self) -> Option<u64> {
        let num = (self.period_s.round() as u128) * PMU_RATE_HZ as u128;
        if (self.period_s - self.period_s.round()).abs() > 1e-9 {
            return None;
        }
        let den = self.samples_per_period as u128;
        (num % den == 0).then(|| (num / den) as u64)
    }
}

fn unit_seconds(unit: &str, allow_year: bool) -> Option<u64> {
    match unit {
        "s" => Some(1),
        "min" => Some(60),
        "h" => Some(3600),
        "d" => Some(86_400),
        "wk" => Some(604_800),
        "yr" if allow_year => Some(52 * 604_800),
        _ => None,
    }
}

fn split_digits(s: &str) -> (&str, &str) {
    let end = s.bytes().position(|b| !b.is_ascii_digit()).unwrap_or(s.len());
    s.split_at(end)
}

fn positive_int(digits: &str, what: &str, text: &str) -> Result<u64, CoreError> {
    let v: u64 = digits
        .parse()
        .map_err(|_| CoreError::ParseError(format!("bad {what} in `{text}`")))?;
    if v == 0 {
        return Err(CoreError::ParseError(format!("{what} must be positive in `{text}`")));
    }
    Ok(v)
}

pub fn parse_resolution(text: &str) -> Result<Resolution, CoreError> {
    let (count, rest) = text
        .split_once('/')
        .ok_or_else(|| CoreError::ParseError(format!("expected `<count>/[<n>]<unit>`, got `{text}`")))?;
    if count.is_empty() || !count.bytes().all(|b| b.is_ascii_digit()) {
        return Err(CoreError::ParseError(format!("bad sample count in `{text}`")));
    }
    let count = positive_int(count, "sample count", text)?;
    let (n, unit) = split_digits(rest);
    let n = if n.is_empty() { 1 } else { positive_int(n, "period multiplier", text)? };
    let unit_s = unit_seconds(unit, false)
        .ok_or_else(|| CoreError::ParseError(format!("unknown unit `{unit}` in `{text}`")))?;
    let period = n
        .checked_mul(unit_s)
        .ok_or_else(|| CoreError::ParseError(format!("period overflows in `{text}`")))?;
    // count / period > 30 samples per second, in exact integer arithmetic.
    if count as u128 > PMU_RATE_HZ as u128 * period as u128 {
        return Err(CoreError::ResolutionTooFine { period_s: period as f64 / count as f64 });
    }
    Ok(Resolution { samples_per_period: count, period_s: period as f64 })
}

/// Parses a duration into seconds.
pub fn parse_duration(text: &str) -> Result<f64, CoreError> {
    let (n, unit) = split_digits(text);
    if n.is_empty() {
        return Err(CoreError::ParseError(format!("expected `<n><unit>`, got `{text}`")));
    }
    let n = positive_int(n, "duration", text)?;
    let unit_s = unit_seconds(unit, true)
        .ok_or_else(|| CoreError::ParseError(format!("unknown unit `{unit}` in `{text}`")))?;
    Ok(n as f64 * unit_s as f64)
}
