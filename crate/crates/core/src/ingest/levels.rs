use super::IngestError;
use crate::poly::{polyfit, polyval};
use crate::resample::divide_by_mean;
use crate::scalar::{mean, Scalar};
use crate::types::{Level, LoadClass, LoadProfile, Normalization, Season, WEEKS_PER_YEAR};

/// Samples in a detrending window: five hours at one sample per 30 s.
pub const DETREND_WINDOW: usize = 600;
/// Index of the first sample of the center hour within the window.
pub const DETREND_CENTER: usize = 240;

const BLOCKS_PER_HOUR: usize = 120;
const HOURS_PER_WEEK: usize = 168;
const TICKS_PER_BLOCK: usize = 900;

/// A training profile together with where it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelProfile<T> {
    pub profile: LoadProfile<T>,
    /// Absolute start time in seconds since January 1st of year zero.
    pub start_s: f64,
    /// The mean the raw data was divided by during normalization.
    pub scale: T,
    /// Level 2 only: monomial coefficients (in the window abscissa scaled to
    /// [-1, 1]) of the quartic removed from the normalized window.
    pub trend: Option<[T; 5]>,
}

#[derive(Debug, Default)]
pub struct LevelDatasets<T> {
    pub l1: Vec<LevelProfile<T>>,
    pub l2: Vec<LevelProfile<T>>,
    pub l3: Vec<LevelProfile<T>>,
    pub l4: Vec<LevelProfile<T>>,
    /// One `InsufficientData` per level that came out empty.
    pub shortfalls: Vec<IngestError>,
}

impl<T: Scalar> LevelDatasets<T> {
    pub fn level(&self, level: Level) -> &[LevelProfile<T>] {
        match level {
            Level::L1 => &self.l1,
            Level::L2 => &self.l2,
            Level::L3 => &self.l3,
            Level::L4 => &self.l4,
        }
    }

    pub fn level_mut(&mut self, level: Level) -> &mut Vec<LevelProfile<T>> {
        match level {
            Level::L1 => &mut self.l1,
            Level::L2 => &mut self.l2,
            Level::L3 => &mut self.l3,
            Level::L4 => &mut self.l4,
        }
    }

    /// Plain profiles of one level, cloned.
    pub fn profiles(&self, level: Level) -> Vec<LoadProfile<T>> {
        self.level(level).iter().map(|p| p.profile.clone()).collect()
    }

    pub fn is_short(&self, level: Level) -> bool {
        self.shortfalls
            .iter()
            .any(|e| matches!(e, IngestError::InsufficientData { level: l, .. } if *l == level))
    }

    /// Appends another load's datasets. Shortfalls are recomputed from the
    /// merged contents.
    pub fn merge(&mut self, other: LevelDatasets<T>) {
        self.l1.extend(other.l1);
        self.l2.extend(other.l2);
        self.l3.extend(other.l3);
        self.l4.extend(other.l4);
        self.refresh_shortfalls("no profiles after merge");
    }

    pub(crate) fn refresh_shortfalls(&mut self, reason: &str) {
        self.shortfalls = Level::ALL
            .into_iter()
            .filter(|&l| self.level(l).is_empty())
            .map(|level| IngestError::InsufficientData { level, reason: reason.to_string() })
            .collect();
    }
}

/// Removes the least-squares quartic fitted over a five-hour window of
/// 30-s samples and returns the center hour's residuals plus the fit.
///
/// The abscissa is the sample index mapped onto [-1, 1]. The residual mean
/// is not removed here.
pub fn detrend_hour<T: Scalar>(window: &[T]) -> Result<(Vec<T>, [T; 5]), IngestError> {
    if window.len() != DETREND_WINDOW {
        return Err(IngestError::WindowTooShort(window.len()));
    }
    let half = T::lit((DETREND_WINDOW as f64 - 1.0) / 2.0);
    let u: Vec<T> = (0..DETREND_WINDOW).map(|j| (T::from_usize_lossy(j) - half) / half).collect();
    let fit = polyfit(&u, window, 4).expect("quartic design on 600 distinct points has full rank");
    let coeffs = [fit[0], fit[1], fit[2], fit[3], fit[4]];
    let residual = (DETREND_CENTER..DETREND_CENTER + BLOCKS_PER_HOUR)
        .map(|j| window[j] - polyval(&coeffs, u[j]))
        .collect();
    Ok((residual, coeffs))
}

/// Splits a 30 Hz load series into all four level datasets.
///
/// `start_s` is the absolute time of the first sample and must lie on the
/// 1/30 s grid. Every level is aligned to absolute boundaries (30 s, hour,
/// week, 52-week year); partial leading and trailing blocks are dropped.
pub fn extract_level_datasets<T: Scalar>(
    load_series: &[T],
    start_s: f64,
    load_class: LoadClass,
) -> Result<LevelDatasets<T>, IngestError> {
    let t0 = to_grid(start_s * 30.0).ok_or(IngestError::MisalignedStart(start_s))?;
    let first_block = t0.div_ceil(TICKS_PER_BLOCK);
    let mut l1 = Vec::new();
    let mut means = Vec::new();
    let mut b = first_block;
    while (b + 1) * TICKS_PER_BLOCK <= t0 + load_series.len() {
        let lo = b * TICKS_PER_BLOCK - t0;
        let window = &load_series[lo..lo + TICKS_PER_BLOCK];
        means.push(mean(window));
        if let Ok((samples, scale)) = divide_by_mean(window) {
            l1.push(LevelProfile {
                profile: LoadProfile {
                    samples,
                    sampling_period_s: Level::L1.sampling_period_s(),
                    load_class,
                    season: None,
                    normalization: Normalization::MeanOne,
                },
                start_s: b as f64 * 30.0,
                scale,
                trend: None,
            });
        }
        b += 1;
    }
    let mut ds = if means.is_empty() {
        LevelDatasets::default()
    } else {
        extract_from_block_means(&means, first_block as f64 * 30.0, load_class)?
    };
    ds.l1 = l1;
    ds.refresh_shortfalls("series too short for a complete profile");
    Ok(ds)
}

/// Level 2-4 extraction from 30-s block means, the entry point for data that
/// is never materialized at 30 Hz. `start_s` must be a multiple of 30 s.
pub fn extract_from_block_means<T: Scalar>(
    block_means: &[T],
    start_s: f64,
    load_class: LoadClass,
) -> Result<LevelDatasets<T>, IngestError> {
    let b0 = to_grid(start_s / 30.0).ok_or(IngestError::MisalignedStart(start_s))?;
    let n = block_means.len();
    let mut ds = LevelDatasets::default();

    // Complete absolute hours covered by the data.
    let h0 = b0.div_ceil(BLOCKS_PER_HOUR);
    let h_end = (b0 + n) / BLOCKS_PER_HOUR;
    let block_at = |h: usize| h * BLOCKS_PER_HOUR - b0;
    let hourly: Vec<T> = (h0..h_end.max(h0))
        .map(|h| mean(&block_means[block_at(h)..block_at(h) + BLOCKS_PER_HOUR]))
        .collect();

    for h in (h0 + 2)..h_end.saturating_sub(2) {
        let lo = block_at(h - 2);
        let window = &block_means[lo..lo + DETREND_WINDOW];
        let center = &window[DETREND_CENTER..DETREND_CENTER + BLOCKS_PER_HOUR];
        let hour_mean = mean(center);
        if !(hour_mean > T::zero()) {
            continue;
        }
        let scaled: Vec<T> = window.iter().map(|&x| x / hour_mean).collect();
        let (mut resid, trend) = detrend_hour(&scaled)?;
        let m = mean(&resid);
        for v in &mut resid {
            *v -= m;
        }
        ds.l2.push(LevelProfile {
            profile: LoadProfile {
                samples: resid,
                sampling_period_s: Level::L2.sampling_period_s(),
                load_class,
                season: None,
                normalization: Normalization::ZeroMeanDetrended,
            },
            start_s: h as f64 * 3600.0,
            scale: hour_mean,
            trend: Some(trend),
        });
    }

    // Complete absolute weeks, from the hourly means.
    let w0 = h0.div_ceil(HOURS_PER_WEEK);
    let w_end = h_end / HOURS_PER_WEEK;
    let mut weekly = Vec::new();
    for w in w0..w_end.max(w0) {
        let lo = w * HOURS_PER_WEEK - h0;
        let hours = &hourly[lo..lo + HOURS_PER_WEEK];
        let week_mean = mean(hours);
        weekly.push(week_mean);
        if let Ok((samples, scale)) = divide_by_mean(hours) {
            ds.l3.push(LevelProfile {
                profile: LoadProfile {
                    samples,
                    sampling_period_s: Level::L3.sampling_period_s(),
                    load_class,
                    season: Some(Season::of_week(w % WEEKS_PER_YEAR + 1)),
                    normalization: Normalization::MeanOne,
                },
                start_s: w as f64 * 604_800.0,
                scale,
                trend: None,
            });
        }
    }

    // Complete 52-week years, from the weekly means.
    let y0 = w0.div_ceil(WEEKS_PER_YEAR);
    let y_end = w_end / WEEKS_PER_YEAR;
    for y in y0..y_end.max(y0) {
        let lo = y * WEEKS_PER_YEAR - w0;
        if let Ok((samples, scale)) = divide_by_mean(&weekly[lo..lo + WEEKS_PER_YEAR]) {
            ds.l4.push(LevelProfile {
                profile: LoadProfile {
                    samples,
                    sampling_period_s: Level::L4.sampling_period_s(),
                    load_class,
                    season: None,
                    normalization: Normalization::MeanOne,
                },
                start_s: y as f64 * crate::types::SECONDS_PER_YEAR,
                scale,
                trend: None,
            });
        }
    }
    ds.refresh_shortfalls("series too short for a complete profile");
    Ok(ds)
}

fn to_grid(x: f64) -> Option<usize> {
    let r = x.round();
    ((x - r).abs() < 1e-6 && r >= 0.0).then_some(r as usize)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{solve_spd, Matrix};

    const RES: LoadClass = LoadClass::MainlyResidential;

    fn u_axis() -> Vec<f64> {
        (0..600).map(|j| (j as f64 - 299.5) / 299.5).collect()
    }

    /// Normal-equations least squares, independent of the QR route.
    fn normal_equations_detrend(window: &[f64]) -> Vec<f64> {
        let u = u_axis();
        let mut ata = Matrix::zeros(5, 5);
        let mut atb = vec![0.0; 5];
        for (j, &x) in u.iter().enumerate() {
            for r in 0..5 {
                atb[r] += x.powi(r as i32) * window[j];
                for c in 0..5 {
                    ata.data[r * 5 + c] += x.powi((r + c) as i32);
                }
            }
        }
        let beta = solve_spd(&ata, &atb).unwrap();
        (240..360)
            .map(|j| window[j] - (0..5).map(|k| beta[k] * u[j].powi(k as i32)).sum::<f64>())
            .collect()
    }

    #[test]
    fn exact_quartic_detrends_to_zero() {
        let w: Vec<f64> = (0..600).map(|j| {
            let t = j as f64 / 120.0;
            3.0 + 0.2 * t - 0.05 * t * t + 0.01 * t.powi(3) - 0.001 * t.powi(4)
        }).collect();
        let (r, _) = detrend_hour(&w).unwrap();
        assert_eq!(r.len(), 120);
        assert!(r.iter().all(|x| x.abs() < 1e-9));
    }

    #[test]
    fn constant_window() {
        let (r, c) = detrend_hour(&vec![4.5f64; 600]).unwrap();
        assert!(r.iter().all(|x| x.abs() < 1e-12));
        assert!((c[0] - 4.5).abs() < 1e-12);
        assert!(c[1..].iter().all(|x| x.abs() < 1e-12));
    }

    #[test]
    fn sinusoid_matches_normal_equations_oracle() {
        let w: Vec<f64> = (0..600)
            .map(|j| {
                let t = j as f64;
                1.0 + 1e-3 * t - 2e-9 * t.powi(3) + 0.05 * (2.0 * std::f64::consts::PI * t / 37.0).sin()
            })
            .collect();
        let (r, _) = detrend_hour(&w).unwrap();
        let oracle = normal_equations_detrend(&w);
        for (a, b) in r.iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-6, "{a} vs {b}");
        }
        // The fit barely touches a fast sinusoid.
        let pure: Vec<f64> = (240..360).map(|j| 0.05 * (2.0 * std::f64::consts::PI * j as f64 / 37.0).sin()).collect();
        let worst = r.iter().zip(&pure).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(worst < 5e-3, "{worst}");
    }

    #[test]
    fn polynomial_invariance() {
        let base: Vec<f64> = (0..600).map(|j| ((j * 7919) % 101) as f64 / 101.0).collect();
        let shifted: Vec<f64> = base
            .iter()
            .enumerate()
            .map(|(j, x)| x + 5.0 - 0.01 * j as f64 + 3e-11 * (j as f64).powi(4))
            .collect();
        let (a, _) = detrend_hour(&base).unwrap();
        let (b, _) = detrend_hour(&shifted).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-8);
        }
    }

    #[test]
    fn window_length_checked() {
        assert!(matches!(detrend_hour(&vec![1.0; 599]), Err(IngestError::WindowTooShort(599))));
    }

    #[test]
    fn constant_week_at_30hz() {
        let series = vec![7.25f64; 30 * 604_800];
        let ds = extract_level_datasets(&series, 0.0, RES).unwrap();
        assert_eq!(ds.l1.len(), 20_160);
        assert!(ds.l1.iter().all(|p| p.profile.samples.iter().all(|&x| x == 1.0)));
        assert_eq!(ds.l2.len(), 168 - 4);
        assert!(ds.l2.iter().all(|p| p.profile.samples.iter().all(|x| x.abs() < 1e-12)));
        assert_eq!(ds.l3.len(), 1);
        assert!(ds.l3[0].profile.samples.iter().all(|&x| x == 1.0));
        assert_eq!(ds.l3[0].profile.season, Some(Season::Winter));
        assert!(ds.l4.is_empty() && ds.is_short(Level::L4));
    }

    #[test]
    fn ninety_minutes_fills_only_low_levels() {
        let series: Vec<f64> = (0..30 * 5400).map(|i| 2.0 + (i as f64 * 0.001).sin() * 0.1).collect();
        let ds = extract_level_datasets(&series, 0.0, RES).unwrap();
        assert_eq!(ds.l1.len(), 180);
        // Only one complete hour and no ±2 h context.
        assert!(ds.l2.is_empty());
        assert!(ds.is_short(Level::L3) && ds.is_short(Level::L4));
        assert!(!ds.is_short(Level::L1));

        // With five hours of context, level 2 appears.
        let means: Vec<f64> = (0..600).map(|i| 2.0 + (i as f64 * 0.03).sin() * 0.1).collect();
        let ds = extract_from_block_means(&means, 0.0, RES).unwrap();
        assert_eq!(ds.l2.len(), 1);
        assert!(ds.l2[0].profile.check().is_ok());
        assert!(ds.is_short(Level::L3));
    }

    #[test]
    fn start_alignment_drops_partial_blocks() {
        let series = vec![1.0f64; 30 * 95];
        let ds = extract_level_datasets(&series, 10.0, RES).unwrap();
        // First boundary at 30 s; 30..60, 60..90 fit, 90..120 does not (ends at 105 s).
        assert_eq!(ds.l1.len(), 2);
        assert_eq!(ds.l1[0].start_s, 30.0);
        assert!(matches!(extract_level_datasets(&series, 0.01, RES), Err(IngestError::MisalignedStart(_))));
        assert!(matches!(extract_from_block_means(&[1.0], 15.0, RES), Err(IngestError::MisalignedStart(_))));
    }

    #[test]
    fn two_years_give_two_year_profiles_and_consistent_scales() {
        let blocks = 2 * 52 * 168 * 120;
        let means: Vec<f64> = (0..blocks)
            .map(|i| {
                let t = i as f64 * 30.0;
                10.0 * (1.0 + 0.2 * (t / 5e6).sin()) * (1.0 + 0.1 * (t / 13_751.0).cos())
            })
            .collect();
        let ds = extract_from_block_means(&means, 0.0, RES).unwrap();
        assert_eq!(ds.l4.len(), 2);
        assert_eq!(ds.l3.len(), 104);
        assert!(ds.l4.iter().all(|p| p.profile.len() == 52 && p.profile.check().is_ok()));
        for (i, week) in ds.l3.iter().enumerate() {
            let year = &ds.l4[i / 52];
            let l4_value = year.profile.samples[i % 52] * year.scale;
            assert!((week.scale - l4_value).abs() <= 1e-9 * week.scale, "week {i}");
        }
        let seasons: Vec<_> = ds.l3.iter().take(52).map(|p| p.profile.season.unwrap()).collect();
        assert_eq!(seasons[0], Season::Winter);
        assert_eq!(seasons[25], Season::Summer);
    }
}
