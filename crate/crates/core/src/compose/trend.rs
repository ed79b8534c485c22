//! Cross-level scaling and hourly trend injection.

use crate::error::CoreError;
use crate::poly::interpolate_quartic;
use crate::resample::DEGENERACY_RATIO;
use crate::scalar::{mean, Scalar};
use crate::types::{LoadProfile, Normalization};

/// Rescales `child` so its mean equals `parent`.
pub fn scale_to_parent<T: Scalar>(child: &LoadProfile<T>, parent: T) -> Result<LoadProfile<T>, CoreError> {
    let m = child.mean();
    let scale_floor = T::lit(DEGENERACY_RATIO) * child.samples.iter().fold(T::zero(), |a, &v| a.max(v.abs()));
    if !(m > T::zero()) || m <= scale_floor {
        return Err(CoreError::DegenerateProfile { mean: m.to_f64().unwrap_or(f64::NAN), threshold: 0.0 });
    }
    if !(parent > T::zero()) {
        return Err(CoreError::InvalidProfile(format!("parent value {} is not positive", parent.to_f64().unwrap_or(f64::NAN))));
    }
    let factor = parent / m;
    let samples = child.samples.iter().map(|&v| v * factor).collect();
    let mut out = LoadProfile { samples, normalization: Normalization::Raw, ..child.clone() };
    // Land the mean on the parent value exactly up to one rounding.
    let drift = parent - mean(&out.samples);
    out.samples.iter_mut().for_each(|v| *v += drift);
    Ok(out)
}

/// Abscissa of sample `i` of an `n`-sample hour whose center sits at hour
/// node `node` (nodes are the integers -2..=2, one per context hour).
pub fn hour_abscissa<T: Scalar>(i: usize, n: usize, node: i32) -> T {
    T::lit(node as f64 + (i as f64 + 0.5) / n as f64 - 0.5)
}

/// Adds to `hour` the quartic through the five hourly values in `context`,
/// where the hour itself is the middle context value.
pub fn add_hour_trend<T: Scalar>(hour: &[T], context: &[T; 5]) -> Vec<T> {
    add_hour_trend_at(hour, context, 0)
}

/// As [`add_hour_trend`] for an hour sitting at context position
/// `node + 2`; used at series edges where the window cannot be centered.
pub fn add_hour_trend_at<T: Scalar>(hour: &[T], context: &[T; 5], node: i32) -> Vec<T> {
    assert!((-2..=2).contains(&node), "node {node} outside the context window");
    let n = hour.len();
    hour.iter()
        .enumerate()
        .map(|(i, &v)| v + interpolate_quartic(context, hour_abscissa::<T>(i, n, node)))
        .collect()
}
