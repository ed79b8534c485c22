use super::ValidateError;
use crate::scalar::{mean, std_dev};

/// Percentage jumps across concatenation seams.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeamStats {
    pub mean_pct: f64,
    /// Population standard deviation.
    pub std_pct: f64,
    pub n_seams: usize,
}

/// For each seam `j` (last sample of a profile), `100·|x[j+1] - x[j]| / x[j]`.
pub fn seam_stats(series: &[f64], seams: &[usize]) -> Result<SeamStats, ValidateError> {
    if seams.is_empty() {
        return Err(ValidateError::NoSeams);
    }
    let mut pct = Vec::with_capacity(seams.len());
    for &j in seams {
        if j + 1 >= series.len() {
            return Err(ValidateError::SeamOutOfRange { index: j });
        }
        if !(series[j] > 0.0) {
            return Err(ValidateError::NonPositiveAtSeam { index: j });
        }
        pct.push(100.0 * (series[j + 1] - series[j]).abs() / series[j]);
    }
    Ok(SeamStats { mean_pct: mean(&pct), std_pct: std_dev(&pct), n_seams: pct.len() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_values() {
        let s = seam_stats(&[100.0, 101.0], &[0]).unwrap();
        assert!((s.mean_pct - 1.0).abs() < 1e-12 && s.std_pct == 0.0 && s.n_seams == 1);
        assert_eq!(seam_stats(&[2.0, 1.0], &[0]).unwrap().mean_pct, 50.0);
        let c = seam_stats(&[3.0; 10], &[2, 5, 8]).unwrap();
        assert_eq!((c.mean_pct, c.std_pct), (0.0, 0.0));
    }

    #[test]
    fn errors() {
        assert_eq!(seam_stats(&[1.0, 2.0], &[]), Err(ValidateError::NoSeams));
        assert_eq!(seam_stats(&[1.0, 2.0], &[1]), Err(ValidateError::SeamOutOfRange { index: 1 }));
        assert_eq!(seam_stats(&[0.0, 2.0], &[0]), Err(ValidateError::NonPositiveAtSeam { index: 0 }));
    }
}
