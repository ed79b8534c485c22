use super::ValidateError;

pub const HISTOGRAM_BINS: usize = 100;

/// Exact first Wasserstein distance between two empirical distributions.
pub fn wasserstein_1d(a: &[f64], b: &[f64]) -> Result<f64, ValidateError> {
    if a.is_empty() || b.is_empty() {
        return Err(ValidateError::EmptyInput);
    }
    Ok(wasserstein_exact(a, b))
}

/// `∫ |F_a(x) - F_b(x)| dx` over the merged sorted samples. Returns NaN if
/// either side is empty.
pub fn wasserstein_exact(a: &[f64], b: &[f64]) -> f64 {
    if a.is_empty() || b.is_empty() {
        return f64::NAN;
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut prev = a[0].min(b[0]);
    let mut total = 0.0;
    while i < a.len() || j < b.len() {
        let x = match (a.get(i), b.get(j)) {
            (Some(&u), Some(&v)) => u.min(v),
            (Some(&u), None) => u,
            (None, Some(&v)) => v,
            (None, None) => unreachable!(),
        };
        total += (i as f64 / na - j as f64 / nb).abs() * (x - prev);
        while i < a.len() && a[i] == x {
            i += 1;
        }
        while j < b.len() && b[j] == x {
            j += 1;
        }
        prev = x;
    }
    total
}

/// Histogram approximation: both sets binned over their joint range, then
/// the L1 distance between the cumulative histograms times the bin width.
pub fn wasserstein_histogram(a: &[f64], b: &[f64], bins: usize) -> Result<f64, ValidateError> {
    if a.is_empty() || b.is_empty() || bins == 0 {
        return Err(ValidateError::EmptyInput);
    }
    let lo = a.iter().chain(b).copied().fold(f64::INFINITY, f64::min);
    let hi = a.iter().chain(b).copied().fold(f64::NEG_INFINITY, f64::max);
    if hi <= lo {
        return Ok(0.0);
    }
    let width = (hi - lo) / bins as f64;
    let hist = |x: &[f64]| {
        let mut h = vec![0.0; bins];
        for &v in x {
            let k = (((v - lo) / width) as usize).min(bins - 1);
            h[k] += 1.0 / x.len() as f64;
        }
        h
    };
    let (ha, hb) = (hist(a), hist(b));
    let (mut ca, mut cb, mut total) = (0.0, 0.0, 0.0);
    for k in 0..bins {
        ca += ha[k];
        cb += hb[k];
        total += (ca - cb).abs() * width;
    }
    Ok(total)
}
