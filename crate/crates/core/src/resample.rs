//! Mean normalization and block downsampling.

use crate::error::CoreError;
use crate::scalar::{mean, Scalar};
use crate::types::{LoadProfile, Metric, Normalization};

/// Relative degeneracy threshold: a profile whose mean does not exceed
/// `DEGENERACY_RATIO * max|x|` cannot be mean-normalized.
pub const DEGENERACY_RATIO: f64 = 1e-9;

/// Divides a raw profile by its arithmetic mean. Returns the normalized
/// profile and the mean that was removed.
pub fn normalize_mean<T: Scalar>(profile: &LoadProfile<T>) -> Result<(LoadProfile<T>, T), CoreError> {
    if profile.normalization != Normalization::Raw {
        return Err(CoreError::InvalidProfile(format!(
            "expected a raw profile, found {:?}",
            profile.normalization
        )));
    }
    let (samples, m) = divide_by_mean(&profile.samples)?;
    let out = LoadProfile {
        samples,
        sampling_period_s: profile.sampling_period_s,
        load_class: profile.load_class,
        season: profile.season,
        normalization: Normalization::MeanOne,
    };
    Ok((out, m))
}

/// Slice-level version of [`normalize_mean`].
pub fn divide_by_mean<T: Scalar>(xs: &[T]) -> Result<(Vec<T>, T), CoreError> {
    if xs.is_empty() {
        return Err(CoreError::EmptyInput);
    }
    let m = mean(xs);
    let max = xs.iter().fold(T::zero(), |acc, &x| acc.max(x.abs()));
    let eps = max * T::lit(DEGENERACY_RATIO);
    if !(m > eps) {
        return Err(CoreError::DegenerateProfile { mean: m.as_f64(), threshold: eps.as_f64() });
    }
    let mut out: Vec<T> = xs.iter().map(|&x| x / m).collect();
    // One correction pass pulls the mean to 1 to within a few ulps.
    let drift = mean(&out);
    if drift != T::one() {
        for v in &mut out {
            *v /= drift;
        }
    }
    Ok((out, m))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Downsampled<T> {
    pub values: Vec<T>,
    /// Trailing samples that did not fill a whole block and were dropped.
    pub truncated: usize,
}

/// Reduces `samples` by `factor`, aggregating each contiguous block with
/// `metric`. An incomplete trailing block is dropped, never padded.
pub fn downsample<T: Scalar>(samples: &[T], factor: usize, metric: Metric) -> Result<Downsampled<T>, CoreError> {
    if factor == 0 {
        return Err(CoreError::InvalidFactor(factor));
    }
    if samples.is_empty() {
        return Err(CoreError::EmptyInput);
    }
    let blocks = samples.len() / factor;
    let truncated = samples.len() - blocks * factor;
    let values = samples
        .chunks_exact(factor)
        .map(|block| aggregate(block, metric))
        .collect();
    Ok(Downsampled { values, truncated })
}

pub fn aggregate<T: Scalar>(block: &[T], metric: Metric) -> T {
    match metric {
        Metric::Mean => mean(block),
        Metric::Min => block.iter().copied().fold(T::infinity(), T::min),
        Metric::Max => block.iter().copied().fold(T::neg_infinity(), T::max),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::LoadClass;
    use proptest::prelude::*;

    fn raw(xs: &[f64]) -> LoadProfile<f64> {
        LoadProfile::raw(xs.to_vec(), 1.0, LoadClass::MainlyResidential).unwrap()
    }

    #[test]
    fn normalize_examples() {
        let (p, m) = normalize_mean(&raw(&[5.0, 5.0, 5.0, 5.0])).unwrap();
        assert_eq!(m, 5.0);
        assert_eq!(p.samples, vec![1.0; 4]);
        assert_eq!(p.normalization, Normalization::MeanOne);

        let (p, m) = normalize_mean(&raw(&[2.0, 4.0])).unwrap();
        assert_eq!(m, 3.0);
        assert!((p.samples[0] - 2.0 / 3.0).abs() < 1e-15);
        assert!((p.samples[1] - 4.0 / 3.0).abs() < 1e-15);

        assert!(matches!(
            normalize_mean(&raw(&[0.0, 0.0, 0.0])),
            Err(CoreError::DegenerateProfile { .. })
        ));
    }

    #[test]
    fn normalize_rejects_already_normalized() {
        let (p, _) = normalize_mean(&raw(&[1.0, 3.0])).unwrap();
        assert!(normalize_mean(&p).is_err());
    }

    #[test]
    fn downsample_examples() {
        let x = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(downsample(&x, 2, Metric::Mean).unwrap().values, vec![1.5, 3.5]);
        assert_eq!(downsample(&x, 2, Metric::Min).unwrap().values, vec![1.0, 3.0]);
        assert_eq!(downsample(&x, 2, Metric::Max).unwrap().values, vec![2.0, 4.0]);
        assert_eq!(downsample::<f64>(&[], 2, Metric::Mean), Err(CoreError::EmptyInput));
        assert_eq!(downsample(&x, 0, Metric::Mean), Err(CoreError::InvalidFactor(0)));
    }

    #[test]
    fn downsample_reports_truncation() {
        let d = downsample(&[1.0, 2.0, 3.0, 4.0, 5.0], 2, Metric::Mean).unwrap();
        assert_eq!(d.values, vec![1.5, 3.5]);
        assert_eq!(d.truncated, 1);
    }

    #[test]
    fn single_precision_works() {
        let d = downsample(&[1.0f32, 2.0, 3.0, 4.0], 4, Metric::Mean).unwrap();
        assert_eq!(d.values, vec![2.5f32]);
    }

    proptest! {
        #[test]
        fn normalize_round_trips(xs in prop::collection::vec(0.01f64..1e4, 1..200)) {
            let (p, m) = normalize_mean(&raw(&xs)).unwrap();
            prop_assert!((p.mean() - 1.0).abs() < 1e-9);
            for (a, b) in p.samples.iter().zip(&xs) {
                prop_assert!((a * m - b).abs() <= 1e-12 * b.abs().max(1e-300));
            }
        }

        #[test]
        fn mean_downsampling_composes(
            xs in prop::collection::vec(-1e3f64..1e3, 1..20),
            f1 in 1usize..6,
            f2 in 1usize..6,
        ) {
            let n = xs.len() * f1 * f2;
            let series: Vec<f64> = (0..n).map(|i| xs[i % xs.len()] + i as f64 * 0.1).collect();
            let a = downsample(&downsample(&series, f1, Metric::Mean).unwrap().values, f2, Metric::Mean).unwrap();
            let b = downsample(&series, f1 * f2, Metric::Mean).unwrap();
            prop_assert_eq!(a.values.len(), b.values.len());
            for (x, y) in a.values.iter().zip(&b.values) {
                prop_assert!((x - y).abs() <= 1e-12 * (1.0 + y.abs()));
            }
            let global: f64 = series.iter().sum::<f64>() / n as f64;
            let ds: f64 = b.values.iter().sum::<f64>() / b.values.len() as f64;
            prop_assert!((global - ds).abs() <= 1e-12 * (1.0 + global.abs()));
        }

        #[test]
        fn min_mean_max_ordered(xs in prop::collection::vec(-1e6f64..1e6, 1..100), f in 1usize..10) {
            let lo = downsample(&xs, f, Metric::Min).unwrap().values;
            let me = downsample(&xs, f, Metric::Mean).unwrap().values;
            let hi = downsample(&xs, f, Metric::Max).unwrap().values;
            for i in 0..me.len() {
                prop_assert!(lo[i] <= me[i] + 1e-9 && me[i] <= hi[i] + 1e-9);
            }
        }
    }
}
