//! Five-tap seam filter smoothing the junction between concatenated profiles.

use serde::{Deserialize, Serialize};

use super::ComposeError;
use crate::linalg::{lstsq_min_norm, Matrix};
use crate::scalar::Scalar;
use crate::types::LoadProfile;

/// Minimum number of interior samples needed to learn a filter.
pub const MIN_TRAINING_SAMPLES: usize = 100;

/// Weight given to the sample being smoothed.
pub const CENTER_WEIGHT: f64 = 0.5;

/// Taps `[b-2, b-1, b0, b1, b2]`; `b0` is always [`CENTER_WEIGHT`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeamFilter<T> {
    beta: [T; 5],
}

impl<T: Scalar> SeamFilter<T> {
    /// Builds a filter from the four neighbor taps.
    pub fn from_neighbors(neighbors: [T; 4]) -> Result<Self, ComposeError> {
        let [a, b, c, d] = neighbors;
        if neighbors.iter().any(|v| !v.is_finite()) {
            return Err(ComposeError::InvalidFilter("non-finite tap".into()));
        }
        Ok(Self { beta: [a, b, T::lit(CENTER_WEIGHT), c, d] })
    }

    /// Builds a filter from all five taps; the center must equal [`CENTER_WEIGHT`].
    pub fn new(beta: [T; 5]) -> Result<Self, ComposeError> {
        if beta[2] != T::lit(CENTER_WEIGHT) {
            return Err(ComposeError::InvalidFilter(format!("center tap must be {CENTER_WEIGHT}")));
        }
        Self::from_neighbors([beta[0], beta[1], beta[3], beta[4]])
    }

    pub fn beta(&self) -> [T; 5] {
        self.beta
    }

    /// Filtered value at `k`; the caller guarantees `2 <= k < len - 2`.
    fn at(&self, x: &[T], k: usize) -> T {
        (0..5).fold(T::zero(), |acc, i| acc + self.beta[i] * x[k + i - 2])
    }
}

/// Design matrix and target of the filter's least-squares problem: one row
/// `[x(k-2), x(k-1), x(k+1), x(k+2)]` per interior sample, target `0.5 x(k)`.
pub fn seam_design<T: Scalar>(profiles: &[LoadProfile<T>]) -> (Matrix<T>, Vec<T>) {
    let mut data = Vec::new();
    let mut target = Vec::new();
    for p in profiles {
        let x = &p.samples;
        for k in 2..x.len().saturating_sub(2) {
            data.extend([x[k - 2], x[k - 1], x[k + 1], x[k + 2]]);
            target.push(T::lit(CENTER_WEIGHT) * x[k]);
        }
    }
    (Matrix { rows: target.len(), cols: 4, data }, target)
}

/// Fits the neighbor taps by minimum-norm least squares over every
/// interior sample of every profile.
pub fn learn_seam_filter<T: Scalar>(profiles: &[LoadProfile<T>]) -> Result<SeamFilter<T>, ComposeError> {
    let (a, b) = seam_design(profiles);
    if a.rows < MIN_TRAINING_SAMPLES {
        return Err(ComposeError::InsufficientData { have: a.rows, need: MIN_TRAINING_SAMPLES });
    }
    let x = lstsq_min_norm(&a, &b, T::lit(1e-12));
    SeamFilter::from_neighbors([x[0], x[1], x[2], x[3]])
}

/// Replaces samples `j-1 ..= j+2` around every seam `j` (the last index of
/// the earlier profile) by the filtered value, reading only original samples.
pub fn apply_seam_filter<T: Scalar>(series: &[T], seams: &[usize], filter: &SeamFilter<T>) -> Result<Vec<T>, ComposeError> {
    let len = series.len();
    for &j in seams {
        if j < 3 || j + 4 >= len {
            return Err(ComposeError::SeamTooCloseToEdge { seam: j, len });
        }
    }
    let mut out = series.to_vec();
    for &j in seams {
        for k in j - 1..=j + 2 {
            out[k] = filter.at(series, k);
        }
    }
    Ok(out)
}
