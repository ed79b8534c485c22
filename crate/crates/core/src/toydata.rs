//! Parametric ground-truth load simulator.
//!
//! A simulated load is
//!
//! ```text
//! x(t) = base_mw · yearly(t) · daily(t) · max(0.05, 1 + fast(t) + minute(t))
//! ```
//!
//! where `yearly` is a two-harmonic Fourier series over the 52-week year,
//! `daily` blends a summer and a winter three-harmonic daily shape by time of
//! year, `fast` is AR(1) noise at 30 Hz and `minute` is AR(1) noise that
//! holds one value per 30-s block. Long horizons are simulated directly as
//! 30-s block means: the block mean of the 30 Hz AR(1) and its end state are
//! jointly Gaussian given the start state, so they are sampled exactly
//! without materializing the 900 samples in between.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::{extract_from_block_means, extract_level_datasets, IngestError, LevelDatasets};
use crate::rng::{self, Rng};
use crate::types::{LoadClass, SECONDS_PER_DAY, SECONDS_PER_WEEK, SECONDS_PER_YEAR};

const BLOCK_S: f64 = 30.0;
const SAMPLES_PER_BLOCK: usize = 900;
/// Lower clamp on the noise factor, keeping every sample positive.
pub const MIN_NOISE_FACTOR: f64 = 0.05;

#[derive(Debug, Error)]
pub enum ToyError {
    #[error("invalid toy configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Toml(#[from] toml::de::Error),
}

/// `1 + Σ cos[h]·cos(2π(h+1)t/T) + sin[h]·sin(2π(h+1)t/T)`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Harmonics {
    pub cos: Vec<f64>,
    pub sin: Vec<f64>,
}

impl Harmonics {
    pub fn flat(n: usize) -> Self {
        Harmonics { cos: vec![0.0; n], sin: vec![0.0; n] }
    }

    fn new<const N: usize>(cos: [f64; N], sin: [f64; N]) -> Self {
        Harmonics { cos: cos.to_vec(), sin: sin.to_vec() }
    }

    pub fn eval(&self, phase: f64) -> f64 {
        let mut v = 1.0;
        for h in 0..self.cos.len() {
            let a = (h as f64 + 1.0) * phase;
            v += self.cos[h] * a.cos() + self.sin[h] * a.sin();
        }
        v
    }

    fn amplitude_sum(&self) -> f64 {
        self.cos.iter().chain(&self.sin).map(|c| c.abs()).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArNoise {
    /// Lag-one coefficient, in [0, 1).
    pub ar: f64,
    /// Stationary standard deviation relative to the envelope, in [0, 0.2].
    pub rel_std: f64,
}

impl ArNoise {
    pub const OFF: ArNoise = ArNoise { ar: 0.0, rel_std: 0.0 };

    fn innovation_std(&self) -> f64 {
        self.rel_std * (1.0 - self.ar * self.ar).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToyLoadConfig {
    pub load_class: LoadClass,
    pub base_mw: f64,
    /// Seasonal modulation over the 52-week year.
    pub yearly: Harmonics,
    /// Daily shape in mid-summer.
    pub daily_summer: Harmonics,
    /// Daily shape in mid-winter.
    pub daily_winter: Harmonics,
    /// Sub-second noise, stepped at 30 Hz.
    pub fast_noise: ArNoise,
    /// Minute-scale noise, stepped every 30 s.
    pub block_noise: ArNoise,
    pub seed: u64,
}

/// Mid-winter, measured from January 1st, where the winter daily shape
/// applies fully.
const MIDWINTER_S: f64 = 3.0 * SECONDS_PER_WEEK;

impl ToyLoadConfig {
    /// Everything switched off: a constant `base_mw` series.
    pub fn flat(load_class: LoadClass, base_mw: f64, seed: u64) -> Self {
        ToyLoadConfig {
            load_class,
            base_mw,
            yearly: Harmonics::flat(2),
            daily_summer: Harmonics::flat(3),
            daily_winter: Harmonics::flat(3),
            fast_noise: ArNoise::OFF,
            block_noise: ArNoise::OFF,
            seed,
        }
    }

    /// Mainly residential: pronounced winter and summer peaks, a smooth
    /// summer day and a two-peak winter day.
    pub fn residential(base_mw: f64, seed: u64) -> Self {
        ToyLoadConfig {
            load_class: LoadClass::MainlyResidential,
            base_mw,
            // 0.14·cos(2·2π(t − wk 3)/Y) + 0.05·cos(2π(t − wk 29)/Y): maxima in
            // mid-January and mid/late July, summer slightly higher.
            yearly: yearly_peaks(0.14, 3.0, 0.05, 29.0),
            daily_summer: Harmonics::new([-0.22, 0.02, 0.0], [-0.12, -0.03, 0.01]),
            daily_winter: Harmonics::new([-0.12, -0.12, 0.03], [-0.06, 0.07, 0.04]),
            fast_noise: ArNoise { ar: 0.3, rel_std: 0.01 },
            block_noise: ArNoise { ar: 0.3, rel_std: 0.015 },
            seed,
        }
    }

    /// Mainly industrial: nearly flat through the year, an irregular
    /// multi-peak day and stronger noise.
    pub fn industrial(base_mw: f64, seed: u64) -> Self {
        ToyLoadConfig {
            load_class: LoadClass::MainlyIndustrial,
            base_mw,
            yearly: yearly_peaks(0.015, 3.0, 0.01, 29.0),
            daily_summer: Harmonics::new([-0.08, 0.06, -0.05], [0.05, -0.07, 0.06]),
            daily_winter: Harmonics::new([-0.06, 0.09, -0.07], [0.07, -0.05, 0.08]),
            fast_noise: ArNoise { ar: 0.4, rel_std: 0.015 },
            block_noise: ArNoise { ar: 0.4, rel_std: 0.03 },
            seed,
        }
    }

    pub fn validate(&self) -> Result<(), ToyError> {
        let bad = |m: String| Err(ToyError::InvalidConfig(m));
        if !(self.base_mw > 0.0 && self.base_mw.is_finite()) {
            return bad(format!("base_mw {} must be positive", self.base_mw));
        }
        for (name, n) in [("fast_noise", self.fast_noise), ("block_noise", self.block_noise)] {
            if !(0.0..1.0).contains(&n.ar) {
                return bad(format!("{name}.ar {} outside [0, 1)", n.ar));
            }
            if !(0.0..=0.2).contains(&n.rel_std) {
                return bad(format!("{name}.rel_std {} outside [0, 0.2]", n.rel_std));
            }
        }
        let shapes = [("yearly", &self.yearly, 2), ("daily_summer", &self.daily_summer, 3), ("daily_winter", &self.daily_winter, 3)];
        for (name, h, n) in shapes {
            if h.cos.len() != n || h.sin.len() != n {
                return bad(format!("{name} needs {n} cosine and {n} sine coefficients"));
            }
            let s = h.amplitude_sum();
            if !(s < 0.9) {
                return bad(format!("{name} harmonic amplitudes sum to {s}, must stay below 0.9"));
            }
        }
        Ok(())
    }

    pub fn yearly(&self, t_s: f64) -> f64 {
        self.yearly.eval(2.0 * PI * t_s / SECONDS_PER_YEAR)
    }

    pub fn daily(&self, t_s: f64) -> f64 {
        let w = 0.5 * (1.0 + (2.0 * PI * (t_s - MIDWINTER_S) / SECONDS_PER_YEAR).cos());
        let phase = 2.0 * PI * t_s / SECONDS_PER_DAY;
        w * self.daily_winter.eval(phase) + (1.0 - w) * self.daily_summer.eval(phase)
    }

    /// Deterministic part of the load at absolute time `t_s`.
    pub fn envelope(&self, t_s: f64) -> f64 {
        self.base_mw * self.yearly(t_s) * self.daily(t_s)
    }
}

/// Two-harmonic yearly series with a semi-annual term peaking at
/// `semi_week` (and half a year later) and an annual term peaking at
/// `annual_week`.
fn yearly_peaks(semi_amp: f64, semi_week: f64, annual_amp: f64, annual_week: f64) -> Harmonics {
    let p1 = 2.0 * PI * annual_week / 52.0;
    let p2 = 2.0 * 2.0 * PI * semi_week / 52.0;
    Harmonics::new([annual_amp * p1.cos(), semi_amp * p2.cos()], [annual_amp * p1.sin(), semi_amp * p2.sin()])
}

/// Closed-form moments of a 900-step AR(1) block given its start state.
#[derive(Debug, Clone, Copy)]
struct BlockMoments {
    /// E[sum | x0] = sum_coef · x0 and E[end | x0] = end_coef · x0.
    sum_coef: f64,
    end_coef: f64,
    sum_std: f64,
    /// Loading of the end state on the standardized sum noise.
    end_on_sum: f64,
    end_resid_std: f64,
}

impl BlockMoments {
    fn new(noise: ArNoise, n: usize) -> Self {
        let phi = noise.ar;
        let se2 = noise.innovation_std().powi(2);
        let (mut sum_coef, mut pk) = (0.0, 1.0);
        for _ in 0..n {
            pk *= phi;
            sum_coef += pk;
        }
        let end_coef = pk;
        // Innovation j (1-based) contributes g_j to the sum and φ^(n-j) to the end.
        let (mut var_s, mut cov, mut var_e) = (0.0, 0.0, 0.0);
        let mut g = 0.0;
        let mut pw = 1.0;
        for _ in 0..n {
            // Iterating j = n, n-1, …: g accumulates φ^0 + … + φ^(n-j).
            g += pw;
            var_s += g * g;
            cov += g * pw;
            var_e += pw * pw;
            pw *= phi;
        }
        let (var_s, cov, var_e) = (se2 * var_s, se2 * cov, se2 * var_e);
        let sum_std = var_s.sqrt();
        let end_on_sum = if sum_std > 0.0 { cov / sum_std } else { 0.0 };
        let end_resid_std = (var_e - end_on_sum * end_on_sum).max(0.0).sqrt();
        BlockMoments { sum_coef, end_coef, sum_std, end_on_sum, end_resid_std }
    }

    /// Returns (block mean, end state).
    fn sample(&self, x0: f64, n: usize, rng: &mut Rng) -> (f64, f64) {
        let z1: f64 = rng::normal(rng);
        let z2: f64 = rng::normal(rng);
        let sum = self.sum_coef * x0 + self.sum_std * z1;
        let end = self.end_coef * x0 + self.end_on_sum * z1 + self.end_resid_std * z2;
        (sum / n as f64, end)
    }
}

/// Minute-scale noise, one value per 30-s block starting at absolute block 0.
pub fn simulate_block_noise(config: &ToyLoadConfig, n_blocks: usize) -> Vec<f64> {
    let noise = config.block_noise;
    let mut r = rng::rng(rng::split_tag(config.seed, "block-noise"));
    let se = noise.innovation_std();
    let mut x = noise.rel_std * rng::normal::<f64>(&mut r);
    (0..n_blocks)
        .map(|_| {
            let v = x;
            x = noise.ar * x + se * rng::normal::<f64>(&mut r);
            v
        })
        .collect()
}

/// 30-s block means over `[0, n_blocks · 30 s)`, sampled exactly from the
/// block distribution of the fast noise.
pub fn simulate_block_means(config: &ToyLoadConfig, block_noise: &[f64]) -> Vec<f64> {
    let moments = BlockMoments::new(config.fast_noise, SAMPLES_PER_BLOCK);
    let mut r = rng::rng(rng::split_tag(config.seed, "fast-blocks"));
    let mut x = config.fast_noise.rel_std * rng::normal::<f64>(&mut r);
    block_noise
        .iter()
        .enumerate()
        .map(|(k, &b)| {
            let (fast_mean, end) = moments.sample(x, SAMPLES_PER_BLOCK, &mut r);
            x = end;
            let t_mid = (k as f64 + 0.5) * BLOCK_S - 0.5 / 30.0;
            config.envelope(t_mid) * (1.0 + fast_mean + b).max(MIN_NOISE_FACTOR)
        })
        .collect()
}

/// Materializes `n_blocks` blocks at 30 Hz starting at absolute block
/// `first_block`, reusing the given minute-scale noise. `stream` selects an
/// independent fast-noise realization.
pub fn simulate_span(config: &ToyLoadConfig, block_noise: &[f64], first_block: usize, n_blocks: usize, stream: u64) -> Vec<f64> {
    let noise = config.fast_noise;
    let mut r = rng::rng(rng::split(rng::split_tag(config.seed, "fast-span"), stream));
    let se = noise.innovation_std();
    let mut x = noise.rel_std * rng::normal::<f64>(&mut r);
    let mut out = Vec::with_capacity(n_blocks * SAMPLES_PER_BLOCK);
    for k in first_block..first_block + n_blocks {
        let b = block_noise[k];
        for j in 0..SAMPLES_PER_BLOCK {
            x = noise.ar * x + se * rng::normal::<f64>(&mut r);
            let t = k as f64 * BLOCK_S + j as f64 / 30.0;
            out.push(config.envelope(t) * (1.0 + x + b).max(MIN_NOISE_FACTOR));
        }
    }
    out
}

/// A 30 Hz series of `duration_s` seconds starting January 1st.
pub fn simulate_ground_truth(config: &ToyLoadConfig, duration_s: f64) -> Result<Vec<f64>, ToyError> {
    config.validate()?;
    if !(duration_s >= 30.0) {
        return Err(ToyError::InvalidConfig(format!("duration {duration_s} s is shorter than 30 s")));
    }
    let samples = (duration_s * 30.0).round() as usize;
    let blocks = samples.div_ceil(SAMPLES_PER_BLOCK);
    let noise = simulate_block_noise(config, blocks);
    let mut out = simulate_span(config, &noise, 0, blocks, 0);
    out.truncate(samples);
    Ok(out)
}

/// A set of simulated loads standing in for a measured fleet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToyFleetConfig {
    pub seed: u64,
    pub years: usize,
    /// Level 1 windows materialized at 30 Hz per load.
    pub l1_windows_per_load: usize,
    /// Consecutive windows per materialized span.
    pub l1_windows_per_span: usize,
    /// Cap on level 2 hours kept per load (uniformly subsampled); 0 keeps all.
    pub l2_profiles_per_load: usize,
    pub loads: Vec<ToyLoadConfig>,
}

impl ToyFleetConfig {
    /// Twelve loads (six residential, six industrial) over two years, each
    /// load's shape jittered from the class template.
    pub fn desk_default(seed: u64) -> Self {
        let mut r = rng::rng(rng::split_tag(seed, "fleet"));
        let mut jitter = |scale: f64| 1.0 + scale * (2.0 * rand::Rng::random::<f64>(&mut r) - 1.0);
        let mut loads = Vec::new();
        for i in 0..12 {
            let load_seed = rng::split(seed, i as u64);
            let base = 50.0 + 25.0 * i as f64;
            let mut c = if i < 6 { ToyLoadConfig::residential(base, load_seed) } else { ToyLoadConfig::industrial(base, load_seed) };
            let yj = jitter(0.25);
            c.yearly.cos.iter_mut().chain(c.yearly.sin.iter_mut()).for_each(|v| *v *= yj);
            let dj = jitter(0.2);
            for h in [&mut c.daily_summer, &mut c.daily_winter] {
                h.cos.iter_mut().chain(h.sin.iter_mut()).for_each(|v| *v *= dj);
            }
            c.block_noise.rel_std *= jitter(0.2);
            c.fast_noise.rel_std *= jitter(0.2);
            loads.push(c);
        }
        ToyFleetConfig { seed, years: 2, l1_windows_per_load: 120, l1_windows_per_span: 20, l2_profiles_per_load: 400, loads }
    }

    pub fn from_toml(text: &str) -> Result<Self, ToyError> {
        let cfg: ToyFleetConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("fleet config serializes")
    }

    pub fn validate(&self) -> Result<(), ToyError> {
        if self.loads.is_empty() {
            return Err(ToyError::InvalidConfig("fleet has no loads".into()));
        }
        if self.years == 0 || self.l1_windows_per_span == 0 {
            return Err(ToyError::InvalidConfig("years and l1_windows_per_span must be positive".into()));
        }
        self.loads.iter().try_for_each(ToyLoadConfig::validate)
    }
}

/// Simulated data of one load: its 30-s block means over the whole horizon
/// and a few 30 Hz spans.
#[derive(Debug, Clone)]
pub struct SimulatedLoad {
    pub config: ToyLoadConfig,
    pub block_means: Vec<f64>,
    /// (absolute start block, 30 Hz samples)
    pub spans: Vec<(usize, Vec<f64>)>,
}

pub fn simulate_load(config: &ToyLoadConfig, years: usize, l1_windows: usize, windows_per_span: usize) -> Result<SimulatedLoad, ToyError> {
    config.validate()?;
    let n_blocks = (years as f64 * SECONDS_PER_YEAR / BLOCK_S) as usize;
    let noise = simulate_block_noise(config, n_blocks);
    let block_means = simulate_block_means(config, &noise);
    let mut r = rng::rng(rng::split_tag(config.seed, "span-starts"));
    let n_spans = l1_windows.div_ceil(windows_per_span);
    let mut spans = Vec::with_capacity(n_spans);
    let mut left = l1_windows;
    for s in 0..n_spans {
        let len = left.min(windows_per_span);
        left -= len;
        let start = rand::Rng::random_range(&mut r, 0..n_blocks - len);
        spans.push((start, simulate_span(config, &noise, start, len, s as u64)));
    }
    Ok(SimulatedLoad { config: config.clone(), block_means, spans })
}

impl SimulatedLoad {
    /// Level datasets of this load, with level 2 subsampled to `l2_cap`
    /// profiles (0 keeps all).
    pub fn level_datasets(&self, l2_cap: usize) -> Result<LevelDatasets<f64>, ToyError> {
        let class = self.config.load_class;
        let mut ds = extract_from_block_means(&self.block_means, 0.0, class)?;
        if l2_cap > 0 && ds.l2.len() > l2_cap {
            let stride = ds.l2.len() as f64 / l2_cap as f64;
            ds.l2 = (0..l2_cap).map(|i| ds.l2[(i as f64 * stride) as usize].clone()).collect();
        }
        for (start, samples) in &self.spans {
            let part = extract_level_datasets(samples, *start as f64 * BLOCK_S, class)?;
            ds.l1.extend(part.l1);
        }
        ds.refresh_shortfalls("simulation horizon too short");
        Ok(ds)
    }

    /// Block means downsampled by an integer factor (e.g. 20 for 10 min).
    pub fn block_mean_series(&self, factor: usize) -> Vec<f64> {
        self.block_means.chunks_exact(factor).map(|c| c.iter().sum::<f64>() / factor as f64).collect()
    }
}

/// Simulates every load of the fleet and merges their level datasets.
pub fn simulate_fleet(cfg: &ToyFleetConfig) -> Result<(Vec<SimulatedLoad>, LevelDatasets<f64>), ToyError> {
    cfg.validate()?;
    let mut all = LevelDatasets::default();
    let mut loads = Vec::with_capacity(cfg.loads.len());
    for c in &cfg.loads {
        let sim = simulate_load(c, cfg.years, cfg.l1_windows_per_load, cfg.l1_windows_per_span)?;
        all.merge(sim.level_datasets(cfg.l2_profiles_per_load)?);
        loads.push(sim);
    }
    Ok((loads, all))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn everything_off_is_constant() {
        let c = ToyLoadConfig::flat(LoadClass::MainlyResidential, 42.0, 1);
        let x = simulate_ground_truth(&c, 60.0).unwrap();
        assert_eq!(x.len(), 1800);
        assert!(x.iter().all(|&v| v == 42.0));
        let noise = simulate_block_noise(&c, 10);
        assert!(simulate_block_means(&c, &noise).iter().all(|&v| v == 42.0));
    }

    #[test]
    fn deterministic_given_seed() {
        let c = ToyLoadConfig::industrial(80.0, 99);
        let a = simulate_ground_truth(&c, 90.0).unwrap();
        let b = simulate_ground_truth(&c, 90.0).unwrap();
        assert_eq!(a, b);
        let mut d = c.clone();
        d.seed = 100;
        assert_ne!(a, simulate_ground_truth(&d, 90.0).unwrap());
    }

    #[test]
    fn config_invariants() {
        let mut c = ToyLoadConfig::residential(1.0, 0);
        c.fast_noise.ar = 1.0;
        assert!(c.validate().is_err());
        let mut c = ToyLoadConfig::residential(1.0, 0);
        c.block_noise.rel_std = 0.25;
        assert!(c.validate().is_err());
        let mut c = ToyLoadConfig::residential(1.0, 0);
        c.base_mw = 0.0;
        assert!(c.validate().is_err());
        assert!(simulate_ground_truth(&ToyLoadConfig::residential(1.0, 0), 10.0).is_err());
    }

    #[test]
    fn positive_at_maximum_noise() {
        let mut c = ToyLoadConfig::industrial(1.0, 5);
        c.fast_noise = ArNoise { ar: 0.0, rel_std: 0.2 };
        c.block_noise = ArNoise { ar: 0.9, rel_std: 0.2 };
        let x = simulate_ground_truth(&c, 3600.0).unwrap();
        assert!(x.iter().all(|&v| v > 0.0));
    }

    /// Class contrast, checked on the closed-form yearly function.
    #[test]
    fn residential_has_two_seasonal_peaks_industrial_is_flat() {
        let weekly = |c: &ToyLoadConfig| -> Vec<f64> {
            (0..52).map(|w| c.yearly((w as f64 + 0.5) * SECONDS_PER_WEEK)).collect()
        };
        let r = weekly(&ToyLoadConfig::residential(1.0, 0));
        let max = r.iter().cloned().fold(f64::MIN, f64::max);
        let min = r.iter().cloned().fold(f64::MAX, f64::min);
        assert!(max / min > 1.3, "{}", max / min);
        let winter_peak = (0..13).max_by(|&a, &b| r[a].total_cmp(&r[b])).unwrap();
        let summer_peak = (22..36).max_by(|&a, &b| r[a].total_cmp(&r[b])).unwrap();
        assert!(winter_peak <= 6, "{winter_peak}");
        assert!((26..=32).contains(&summer_peak), "{summer_peak}");
        // Both are genuine local maxima.
        for p in [winter_peak, summer_peak] {
            assert!(r[p] > r[p + 5] && r[p] > r[(p + 47) % 52]);
        }
        let i = weekly(&ToyLoadConfig::industrial(1.0, 0));
        assert!(i.iter().all(|v| (v - 1.0).abs() <= 0.05));
    }

    #[test]
    fn weekly_means_follow_yearly_function() {
        let c = ToyLoadConfig::residential(10.0, 3);
        let sim = simulate_load(&c, 1, 0, 1).unwrap();
        let per_week = 20_160;
        for w in 0..52 {
            let m = sim.block_means[w * per_week..(w + 1) * per_week].iter().sum::<f64>() / per_week as f64;
            let expected = c.base_mw * c.yearly((w as f64 + 0.5) * SECONDS_PER_WEEK);
            assert!((m / expected - 1.0).abs() < 0.02, "week {w}: {m} vs {expected}");
        }
    }

    /// The block path must agree in distribution with materialized 30 Hz
    /// data: compare the variance of block means of the fast noise.
    #[test]
    fn exact_block_sampling_matches_materialized_noise() {
        let mut c = ToyLoadConfig::flat(LoadClass::MainlyResidential, 1.0, 11);
        c.fast_noise = ArNoise { ar: 0.6, rel_std: 0.05 };
        let n = 4000;
        let noise = vec![0.0; n];
        let fast = simulate_block_means(&c, &noise);
        let span = simulate_span(&c, &noise, 0, n, 0);
        let slow: Vec<f64> = span.chunks_exact(900).map(|b| b.iter().sum::<f64>() / 900.0).collect();
        let var = |x: &[f64]| {
            let m = x.iter().sum::<f64>() / x.len() as f64;
            x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / x.len() as f64
        };
        // Closed form: σ²(1+φ)/((1-φ) n) for large n.
        let theory = 0.05f64.powi(2) * 1.6 / (0.4 * 900.0);
        for v in [var(&fast), var(&slow)] {
            assert!((v / theory - 1.0).abs() < 0.1, "{v} vs {theory}");
        }
    }

    #[test]
    fn fleet_config_round_trips_through_toml() {
        let cfg = ToyFleetConfig::desk_default(7);
        assert_eq!(cfg.loads.len(), 12);
        let back = ToyFleetConfig::from_toml(&cfg.to_toml()).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn two_year_load_yields_two_year_profiles() {
        let c = ToyLoadConfig::industrial(60.0, 4);
        let sim = simulate_load(&c, 2, 40, 20).unwrap();
        let ds = sim.level_datasets(100).unwrap();
        assert_eq!(ds.l4.len(), 2);
        assert_eq!(ds.l3.len(), 104);
        assert_eq!(ds.l2.len(), 100);
        assert_eq!(ds.l1.len(), 40);
        assert!(ds.shortfalls.is_empty());
    }
}
