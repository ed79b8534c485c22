use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::CoreError;
use crate::scalar::Scalar;

pub const SECONDS_PER_HOUR: f64 = 3600.0;
pub const SECONDS_PER_DAY: f64 = 86_400.0;
pub const SECONDS_PER_WEEK: f64 = 604_800.0;
/// A modeled year is exactly 52 weeks (364 days).
pub const WEEKS_PER_YEAR: usize = 52;
pub const SECONDS_PER_YEAR: f64 = SECONDS_PER_WEEK * WEEKS_PER_YEAR as f64;
/// Phasor measurement rate, and the finest resolution the generator emits.
pub const PMU_RATE_HZ: f64 = 30.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LoadClass {
    #[serde(rename = "residential")]
    MainlyResidential,
    #[serde(rename = "industrial")]
    MainlyIndustrial,
}

impl LoadClass {
    pub const ALL: [LoadClass; 2] = [LoadClass::MainlyResidential, LoadClass::MainlyIndustrial];

    pub fn index(self) -> usize {
        match self {
            LoadClass::MainlyResidential => 0,
            LoadClass::MainlyIndustrial => 1,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            LoadClass::MainlyResidential => "residential",
            LoadClass::MainlyIndustrial => "industrial",
        }
    }
}

impl fmt::Display for LoadClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LoadClass {
    type Err = CoreError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "residential" => Ok(LoadClass::MainlyResidential),
            "industrial" => Ok(LoadClass::MainlyIndustrial),
            other => Err(CoreError::ParseError(format!("unknown load class `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Season {
    Winter,
    Spring,
    Summer,
    Fall,
}

impl Season {
    pub const ALL: [Season; 4] = [Season::Winter, Season::Spring, Season::Summer, Season::Fall];

    pub fn index(self) -> usize {
        match self {
            Season::Winter => 0,
            Season::Spring => 1,
            Season::Summer => 2,
            Season::Fall => 3,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Season::Winter => "winter",
            Season::Spring => "spring",
            Season::Summer => "summer",
            Season::Fall => "fall",
        }
    }

    /// First week (1-based) of the season in the yearly calendar. Winter
    /// starts on January 1st even though it also covers weeks 49-52.
    pub fn first_week(self) -> usize {
        match self {
            Season::Winter => 1,
            Season::Spring => 10,
            Season::Summer => 23,
            Season::Fall => 36,
        }
    }

    /// Season of a 1-based week of the year: weeks 1-9 and 49-52 are
    /// winter, 10-22 spring, 23-35 summer, 36-48 fall. Weeks past 52 wrap.
    pub fn of_week(week: usize) -> Season {
        let w = (week.max(1) - 1) % WEEKS_PER_YEAR + 1;
        match w {
            1..=9 | 49..=52 => Season::Winter,
            10..=22 => Season::Spring,
            23..=35 => Season::Summer,
            _ => Season::Fall,
        }
    }
}

impl fmt::Display for Season {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Season {
    type Err = CoreError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "winter" => Ok(Season::Winter),
            "spring" => Ok(Season::Spring),
            "summer" => Ok(Season::Summer),
            "fall" | "autumn" => Ok(Season::Fall),
            other => Err(CoreError::ParseError(format!("unknown season `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Normalization {
    Raw,
    MeanOne,
    ZeroMeanDetrended,
}

/// Block aggregation used when reducing resolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Mean,
    Min,
    Max,
}

impl FromStr for Metric {
    type Err = CoreError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "mean" => Ok(Metric::Mean),
            "min" => Ok(Metric::Min),
            "max" => Ok(Metric::Max),
            other => Err(CoreError::ParseError(format!("unknown aggregation `{other}`"))),
        }
    }
}

/// The four aggregation levels, finest first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Level {
    L1,
    L2,
    L3,
    L4,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelSpec {
    pub level: Level,
    pub profile_length: usize,
    pub sampling_period_s: f64,
}

impl Level {
    pub const ALL: [Level; 4] = [Level::L1, Level::L2, Level::L3, Level::L4];

    /// L1 is 30 s at 30 Hz, so 900 samples. The 900 is forced by the span
    /// and the PMU rate; nothing else fixes it.
    pub fn profile_length(self) -> usize {
        match self {
            Level::L1 => 900,
            Level::L2 => 120,
            Level::L3 => 168,
            Level::L4 => 52,
        }
    }

    pub fn sampling_period_s(self) -> f64 {
        match self {
            Level::L1 => 1.0 / PMU_RATE_HZ,
            Level::L2 => 30.0,
            Level::L3 => SECONDS_PER_HOUR,
            Level::L4 => SECONDS_PER_WEEK,
        }
    }

    /// Sampling period in PMU ticks (1/30 s).
    pub fn period_ticks(self) -> u64 {
        match self {
            Level::L1 => 1,
            Level::L2 => 900,
            Level::L3 => 108_000,
            Level::L4 => 18_144_000,
        }
    }

    pub fn span_s(self) -> f64 {
        match self {
            Level::L1 => 30.0,
            Level::L2 => SECONDS_PER_HOUR,
            Level::L3 => SECONDS_PER_WEEK,
            Level::L4 => SECONDS_PER_YEAR,
        }
    }

    pub fn normalization(self) -> Normalization {
        match self {
            Level::L2 => Normalization::ZeroMeanDetrended,
            _ => Normalization::MeanOne,
        }
    }

    pub fn spec(self) -> LevelSpec {
        LevelSpec {
            level: self,
            profile_length: self.profile_length(),
            sampling_period_s: self.sampling_period_s(),
        }
    }

    pub fn number(self) -> u8 {
        match self {
            Level::L1 => 1,
            Level::L2 => 2,
            Level::L3 => 3,
            Level::L4 => 4,
        }
    }

    pub fn from_number(n: u8) -> Option<Level> {
        match n {
            1 => Some(Level::L1),
            2 => Some(Level::L2),
            3 => Some(Level::L3),
            4 => Some(Level::L4),
            _ => None,
        }
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "level {}", self.number())
    }
}

/// A sampled load sequence plus the metadata needed to interpret it.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadProfile<T> {
    pub samples: Vec<T>,
    pub sampling_period_s: f64,
    pub load_class: LoadClass,
    pub season: Option<Season>,
    pub normalization: Normalization,
}

impl<T: Scalar> LoadProfile<T> {
    pub fn new(
        samples: Vec<T>,
        sampling_period_s: f64,
        load_class: LoadClass,
        season: Option<Season>,
        normalization: Normalization,
    ) -> Result<Self, CoreError> {
        let p = LoadProfile { samples, sampling_period_s, load_class, season, normalization };
        p.check()?;
        Ok(p)
    }

    pub fn raw(samples: Vec<T>, sampling_period_s: f64, load_class: LoadClass) -> Result<Self, CoreError> {
        Self::new(samples, sampling_period_s, load_class, None, Normalization::Raw)
    }

    /// Verifies the value invariants for the declared normalization.
    pub fn check(&self) -> Result<(), CoreError> {
        if !(self.sampling_period_s > 0.0) || !self.sampling_period_s.is_finite() {
            return Err(CoreError::InvalidProfile(format!(
                "sampling period {} is not positive",
                self.sampling_period_s
            )));
        }
        if let Some(i) = self.samples.iter().position(|x| !x.is_finite()) {
            return Err(CoreError::InvalidProfile(format!("sample {i} is not finite")));
        }
        match self.normalization {
            Normalization::Raw | Normalization::MeanOne => {
                if let Some(i) = self.samples.iter().position(|&x| x < T::zero()) {
                    return Err(CoreError::InvalidProfile(format!("sample {i} is negative")));
                }
                if self.normalization == Normalization::MeanOne && !self.samples.is_empty() {
                    let m = crate::scalar::mean(&self.samples).as_f64();
                    if (m - 1.0).abs() > mean_tolerance::<T>(1e-9) {
                        return Err(CoreError::InvalidProfile(format!("MeanOne profile has mean {m}")));
                    }
                }
            }
            Normalization::ZeroMeanDetrended => {
                let m = crate::scalar::mean(&self.samples).as_f64();
                if m.abs() > mean_tolerance::<T>(1e-6) {
                    return Err(CoreError::InvalidProfile(format!("detrended profile has mean {m}")));
                }
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn mean(&self) -> T {
        crate::scalar::mean(&self.samples)
    }

    pub fn span_s(&self) -> f64 {
        self.samples.len() as f64 * self.sampling_period_s
    }
}

/// Mean tolerances are stated for f64; single precision gets a looser bound.
fn mean_tolerance<T: Scalar>(f64_tol: f64) -> f64 {
    f64_tol.max(T::epsilon().as_f64() * 64.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn level_spans_are_consistent() {
        for level in Level::ALL {
            let s = level.spec();
            let span = s.profile_length as f64 * s.sampling_period_s;
            assert!((span - level.span_s()).abs() < 1e-9 * level.span_s(), "{level}");
            let ticks = level.period_ticks() as f64 / PMU_RATE_HZ;
            assert!((ticks - level.sampling_period_s()).abs() < 1e-9 * ticks);
        }
        assert_eq!(SECONDS_PER_YEAR, 364.0 * SECONDS_PER_DAY);
    }

    #[test]
    fn season_map_covers_year() {
        let counts = (1..=52).fold([0usize; 4], |mut acc, w| {
            acc[Season::of_week(w).index()] += 1;
            acc
        });
        assert_eq!(counts, [13, 13, 13, 13]);
        assert_eq!(Season::of_week(1), Season::Winter);
        assert_eq!(Season::of_week(49), Season::Winter);
        assert_eq!(Season::of_week(22), Season::Spring);
        assert_eq!(Season::of_week(23), Season::Summer);
        assert_eq!(Season::of_week(48), Season::Fall);
        assert_eq!(Season::of_week(53), Season::Winter);
        for s in Season::ALL {
            assert_eq!(Season::of_week(s.first_week()), s);
        }
    }

    #[test]
    fn profile_invariants_are_checked() {
        let c = LoadClass::MainlyResidential;
        assert!(LoadProfile::<f64>::raw(vec![1.0, -0.5], 1.0, c).is_err());
        assert!(LoadProfile::<f64>::raw(vec![1.0, f64::NAN], 1.0, c).is_err());
        assert!(LoadProfile::<f64>::raw(vec![1.0], 0.0, c).is_err());
        assert!(LoadProfile::<f64>::new(vec![0.5, 1.4], 1.0, c, None, Normalization::MeanOne).is_err());
        assert!(LoadProfile::<f64>::new(vec![0.5, 1.5], 1.0, c, None, Normalization::MeanOne).is_ok());
        assert!(
            LoadProfile::<f64>::new(vec![-0.5, 0.5], 1.0, c, None, Normalization::ZeroMeanDetrended).is_ok()
        );
    }
}
