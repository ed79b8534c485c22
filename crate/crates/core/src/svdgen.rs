//! Level-4 model: yearly patterns from a singular value decomposition of
//! the training year-profiles, with new profiles drawn by sampling the
//! coefficient of each pattern from a per-column Gaussian.

use thiserror::Error;

use crate::linalg::{svd, Matrix};
use crate::resample::divide_by_mean;
use crate::rng;
use crate::scalar::{mean, std_dev, Scalar};
use crate::types::{Level, LoadClass, LoadProfile, Normalization};

/// Floor applied to generated weekly values before re-normalizing.
pub const MIN_GENERATED_VALUE: f64 = 0.01;
/// Singular values below this fraction of the largest raise a warning.
pub const RANK_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SvdError {
    #[error("need at least 2 year profiles, got {0}")]
    TooFewProfiles(usize),
    #[error("profile {index} has {len} samples, expected 52")]
    WrongLength { index: usize, len: usize },
    #[error("profile {index} has mean {mean}, expected 1")]
    NotMeanOne { index: usize, mean: f64 },
    #[error("profile {index} is {found}, model is for {expected}")]
    ClassMismatch { index: usize, found: LoadClass, expected: LoadClass },
    #[error("coefficient vector has {got} entries, model has {expected}")]
    CoefficientCount { got: usize, expected: usize },
    #[error("retained rank {0} is zero or exceeds the decomposition")]
    InvalidRank(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub enum SvdWarning {
    /// Singular value `index` is numerically zero relative to the largest.
    RankDeficient { index: usize, value: f64, largest: f64 },
}

/// Gaussian fitted to one column of `U`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoefficientDistribution {
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvdModel<T> {
    pub load_class: LoadClass,
    /// Left singular vectors, one row per training profile.
    pub u: Matrix<T>,
    pub singular_values: Vec<T>,
    /// Right singular vectors as rows (`r × 52`).
    pub vt: Matrix<T>,
    /// One Gaussian per column of `u`.
    pub coefficients: Vec<CoefficientDistribution>,
    /// Number of leading patterns used for generation.
    pub rank: usize,
    pub warnings: Vec<SvdWarning>,
}

/// Decomposes the year profiles (each mean one, 52 weekly samples) of one
/// load class. `rank` truncates generation to the leading patterns; `None`
/// keeps them all.
pub fn fit_svd_model<T: Scalar>(
    profiles: &[LoadProfile<T>],
    load_class: LoadClass,
    rank: Option<usize>,
) -> Result<SvdModel<T>, SvdError> {
    if profiles.len() < 2 {
        return Err(SvdError::TooFewProfiles(profiles.len()));
    }
    let cols = Level::L4.profile_length();
    for (index, p) in profiles.iter().enumerate() {
        if p.len() != cols {
            return Err(SvdError::WrongLength { index, len: p.len() });
        }
        if p.load_class != load_class {
            return Err(SvdError::ClassMismatch { index, found: p.load_class, expected: load_class });
        }
        let m = p.mean().as_f64();
        if (m - 1.0).abs() > 1e-9 {
            return Err(SvdError::NotMeanOne { index, mean: m });
        }
    }
    let l = Matrix::from_fn(profiles.len(), cols, |r, c| profiles[r].samples[c]);
    let d = svd(&l);
    let full = d.s.len();
    let rank = rank.unwrap_or(full);
    if rank == 0 || rank > full {
        return Err(SvdError::InvalidRank(rank));
    }
    let largest = d.s[0].as_f64();
    let warnings = d
        .s
        .iter()
        .enumerate()
        .filter(|(_, s)| s.as_f64() < RANK_TOLERANCE * largest)
        .map(|(index, s)| SvdWarning::RankDeficient { index, value: s.as_f64(), largest })
        .collect();
    let coefficients = (0..full)
        .map(|k| {
            let col: Vec<f64> = (0..d.u.rows).map(|r| d.u.get(r, k).as_f64()).collect();
            CoefficientDistribution { mean: mean(&col), std: std_dev(&col) }
        })
        .collect();
    Ok(SvdModel { load_class, u: d.u, singular_values: d.s, vt: d.vt, coefficients, rank, warnings })
}

impl<T: Scalar> SvdModel<T> {
    /// `Σ Vᵀ`, restricted to the retained rank.
    pub fn patterns(&self) -> Matrix<T> {
        Matrix::from_fn(self.rank, self.vt.cols, |r, c| self.singular_values[r] * self.vt.get(r, c))
    }

    /// `U Σ Vᵀ` over all components.
    pub fn reconstruct(&self) -> Matrix<T> {
        let k = self.singular_values.len();
        Matrix::from_fn(self.u.rows, self.vt.cols, |r, c| {
            (0..k).map(|j| self.u.get(r, j) * self.singular_values[j] * self.vt.get(j, c)).sum()
        })
    }

    /// `c · ΣVᵀ`, floored at [`MIN_GENERATED_VALUE`] and rescaled to mean one.
    /// Coefficients beyond the retained rank must be absent.
    pub fn profile_from_coefficients(&self, c: &[T]) -> Result<LoadProfile<T>, SvdError> {
        if c.len() != self.rank {
            return Err(SvdError::CoefficientCount { got: c.len(), expected: self.rank });
        }
        let cols = self.vt.cols;
        let mut x = vec![T::zero(); cols];
        for (k, &ck) in c.iter().enumerate() {
            let w = ck * self.singular_values[k];
            for (xi, j) in x.iter_mut().zip(0..cols) {
                *xi += w * self.vt.get(k, j);
            }
        }
        let floor = T::lit(MIN_GENERATED_VALUE);
        for v in &mut x {
            if !(*v >= floor) {
                *v = floor;
            }
        }
        let (samples, _) = divide_by_mean(&x).expect("floored profile has a positive mean");
        Ok(LoadProfile {
            samples,
            sampling_period_s: Level::L4.sampling_period_s(),
            load_class: self.load_class,
            season: None,
            normalization: Normalization::MeanOne,
        })
    }

    /// Profile `i` uses coefficients drawn from the stream `split(seed, i)`.
    pub fn generate(&self, count: usize, seed: u64) -> Vec<LoadProfile<T>> {
        (0..count)
            .map(|i| {
                let mut r = rng::rng(rng::split(seed, i as u64));
                let c: Vec<T> = self.coefficients[..self.rank]
                    .iter()
                    .map(|d| T::lit(d.mean + d.std * rng::normal::<f64>(&mut r)))
                    .collect();
                self.profile_from_coefficients(&c).expect("rank-sized coefficient vector")
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn year(samples: Vec<f64>, class: LoadClass) -> LoadProfile<f64> {
        let (samples, _) = divide_by_mean(&samples).unwrap();
        LoadProfile { samples, sampling_period_s: Level::L4.sampling_period_s(), load_class: class, season: None, normalization: Normalization::MeanOne }
    }

    fn seasonal(k: usize, amp: f64, phase: f64) -> LoadProfile<f64> {
        year((0..52).map(|w| 1.0 + amp * ((w as f64 + phase + k as f64) * 0.24).cos()).collect(), LoadClass::MainlyResidential)
    }

    #[test]
    fn reconstructs_and_is_orthonormal() {
        let ps: Vec<_> = (0..6).map(|k| seasonal(k, 0.1 + 0.02 * k as f64, 0.5 * k as f64)).collect();
        let m = fit_svd_model(&ps, LoadClass::MainlyResidential, None).unwrap();
        let rec = m.reconstruct();
        for r in 0..6 {
            for c in 0..52 {
                assert!((rec.get(r, c) - ps[r].samples[c]).abs() < 1e-12);
            }
        }
        for i in 0..m.vt.rows {
            for j in 0..m.vt.rows {
                let d: f64 = (0..52).map(|c| m.vt.get(i, c) * m.vt.get(j, c)).sum();
                assert!((d - if i == j { 1.0 } else { 0.0 }).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn identical_rows_warn_rank_deficient() {
        let p = seasonal(0, 0.2, 0.0);
        let m = fit_svd_model(&[p.clone(), p], LoadClass::MainlyResidential, None).unwrap();
        assert!(m.singular_values[1] < 1e-12 * m.singular_values[0]);
        assert!(matches!(m.warnings[..], [SvdWarning::RankDeficient { index: 1, .. }]));
    }

    #[test]
    fn training_coefficients_reproduce_training_rows() {
        let ps: Vec<_> = (0..5).map(|k| seasonal(k, 0.15, k as f64)).collect();
        let m = fit_svd_model(&ps, LoadClass::MainlyResidential, None).unwrap();
        for (i, p) in ps.iter().enumerate() {
            let c: Vec<f64> = (0..m.rank).map(|k| m.u.get(i, k)).collect();
            let g = m.profile_from_coefficients(&c).unwrap();
            for (a, b) in g.samples.iter().zip(&p.samples) {
                assert!((a - b).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn generated_profiles_lie_in_pattern_space() {
        let ps: Vec<_> = (0..8).map(|k| seasonal(k, 0.1, 2.0 * k as f64)).collect();
        let m = fit_svd_model(&ps, LoadClass::MainlyResidential, None).unwrap();
        assert!(m.generate(0, 1).is_empty());
        let g = m.generate(20, 9);
        assert_eq!(g, m.generate(20, 9));
        for p in &g {
            assert!((p.mean() - 1.0).abs() < 1e-9);
            // Residual after projecting onto the rows of Vᵀ.
            let mut resid = p.samples.clone();
            for k in 0..m.vt.rows {
                let coef: f64 = (0..52).map(|c| m.vt.get(k, c) * p.samples[c]).sum();
                for c in 0..52 {
                    resid[c] -= coef * m.vt.get(k, c);
                }
            }
            assert!(resid.iter().map(|v| v * v).sum::<f64>().sqrt() < 1e-9);
        }
    }

    #[test]
    fn fitting_one_class_leaves_the_other_untouched() {
        let res: Vec<_> = (0..4).map(|k| seasonal(k, 0.2, 0.0)).collect();
        let ind: Vec<_> = (0..4)
            .map(|k| year((0..52).map(|w| 1.0 + 0.01 * ((w * (k + 1)) as f64).sin()).collect(), LoadClass::MainlyIndustrial))
            .collect();
        let a = fit_svd_model(&ind, LoadClass::MainlyIndustrial, None).unwrap();
        let before = a.clone();
        let _b = fit_svd_model(&res, LoadClass::MainlyResidential, None).unwrap();
        assert_eq!(a, before);
    }

    #[test]
    fn validation_errors() {
        let p = seasonal(0, 0.1, 0.0);
        assert_eq!(fit_svd_model(&[p.clone()], LoadClass::MainlyResidential, None).unwrap_err(), SvdError::TooFewProfiles(1));
        assert!(matches!(fit_svd_model(&[p.clone(), p.clone()], LoadClass::MainlyIndustrial, None), Err(SvdError::ClassMismatch { .. })));
        let mut q = p.clone();
        q.samples[0] += 0.5;
        assert!(matches!(fit_svd_model(&[p.clone(), q], LoadClass::MainlyResidential, None), Err(SvdError::NotMeanOne { index: 1, .. })));
        assert_eq!(fit_svd_model(&[p.clone(), p], LoadClass::MainlyResidential, Some(3)).unwrap_err(), SvdError::InvalidRank(3));
    }
}
