use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use super::ValidateError;
use crate::scalar::Scalar;
use crate::types::LoadProfile;

/// One-sided spectrum from 0 to the Nyquist frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub frequencies: Vec<f64>,
    /// Power density per Hz, or dB in [`mean_log_psd`] output.
    pub density: Vec<f64>,
}

impl Spectrum {
    pub fn bin_width(&self) -> f64 {
        self.frequencies.get(1).copied().unwrap_or(0.0) - self.frequencies[0]
    }
}

/// One-sided periodogram `|X_k|²·dt/N`, interior bins doubled, so that
/// `Σ P_k · df` equals the mean squared sample value.
pub fn periodogram(samples: &[f64], dt: f64) -> Vec<f64> {
    let n = samples.len();
    let mut buf: Vec<Complex<f64>> = samples.iter().map(|&x| Complex::new(x, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let half = n / 2;
    (0..=half)
        .map(|k| {
            let p = buf[k].norm_sqr() * dt / n as f64;
            let mirrored = k != 0 && !(n % 2 == 0 && k == half);
            if mirrored {
                2.0 * p
            } else {
                p
            }
        })
        .collect()
}

fn check<T: Scalar>(profiles: &[LoadProfile<T>]) -> Result<(usize, f64), ValidateError> {
    let first = profiles.first().ok_or(ValidateError::EmptyInput)?;
    let (n, dt) = (first.len(), first.sampling_period_s);
    if n == 0 {
        return Err(ValidateError::EmptyInput);
    }
    for p in profiles {
        if p.sampling_period_s != dt {
            return Err(ValidateError::MixedSamplingPeriods);
        }
        if p.len() != n {
            return Err(ValidateError::MixedLengths);
        }
    }
    Ok((n, dt))
}

fn frequencies(n: usize, dt: f64) -> Vec<f64> {
    (0..=n / 2).map(|k| k as f64 / (n as f64 * dt)).collect()
}

/// Periodogram averaged over profiles.
pub fn psd<T: Scalar>(profiles: &[LoadProfile<T>]) -> Result<Spectrum, ValidateError> {
    let (n, dt) = check(profiles)?;
    let mut acc = vec![0.0; n / 2 + 1];
    for p in profiles {
        let x: Vec<f64> = p.samples.iter().map(|v| v.as_f64()).collect();
        for (a, v) in acc.iter_mut().zip(periodogram(&x, dt)) {
            *a += v;
        }
    }
    let m = profiles.len() as f64;
    Ok(Spectrum { frequencies: frequencies(n, dt), density: acc.into_iter().map(|v| v / m).collect() })
}

/// Per-bin mean over profiles of `10·log10(periodogram)`, in dB.
pub fn mean_log_psd<T: Scalar>(profiles: &[LoadProfile<T>]) -> Result<Spectrum, ValidateError> {
    let (n, dt) = check(profiles)?;
    let mut acc = vec![0.0; n / 2 + 1];
    for p in profiles {
        let x: Vec<f64> = p.samples.iter().map(|v| v.as_f64()).collect();
        for (a, v) in acc.iter_mut().zip(periodogram(&x, dt)) {
            *a += 10.0 * v.max(1e-300).log10();
        }
    }
    let m = profiles.len() as f64;
    Ok(Spectrum { frequencies: frequencies(n, dt), density: acc.into_iter().map(|v| v / m).collect() })
}

/// Largest absolute difference between two dB spectra over bins with
/// `0 < f < f_max`.
pub fn log_psd_gap_db(a: &Spectrum, b: &Spectrum, f_max: f64) -> f64 {
    a.frequencies
        .iter()
        .zip(a.density.iter().zip(&b.density))
        .filter(|(f, _)| **f > 0.0 && **f < f_max)
        .map(|(_, (x, y))| (x - y).abs())
        .fold(0.0, f64::max)
}
