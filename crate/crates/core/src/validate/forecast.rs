use super::ValidateError;
use crate::linalg::{solve_spd, Matrix};
use crate::scalar::{mean, std_dev};

/// Six hours of 10-minute samples.
pub const DEFAULT_LAGS: usize = 36;
/// Ridge penalty on the per-row mean squared error objective.
pub const AR_RIDGE: f64 = 1e-6;
pub const MIN_PREDICTIONS: usize = 100;

/// Linear autoregressor without intercept: `x[t] ≈ Σ_k w[k]·x[t-1-k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ArModel {
    pub coefficients: Vec<f64>,
}

impl ArModel {
    pub fn lags(&self) -> usize {
        self.coefficients.len()
    }

    /// Prediction following `history`, which must hold at least `lags`
    /// values (only the last `lags` are used).
    pub fn predict_next(&self, history: &[f64]) -> f64 {
        let p = self.lags();
        let recent = &history[history.len() - p..];
        self.coefficients.iter().zip(recent.iter().rev()).map(|(w, x)| w * x).sum()
    }
}

/// Ridge least squares over every window of every series. Each series is
/// divided by its mean first so that loads of different size weigh equally;
/// the model has no intercept, so predictions are scale-equivariant.
pub fn fit_ar(series: &[Vec<f64>], lags: usize, ridge: f64) -> Result<ArModel, ValidateError> {
    if series.is_empty() || lags == 0 {
        return Err(ValidateError::EmptyInput);
    }
    let mut gram = vec![0.0; lags * lags];
    let mut rhs = vec![0.0; lags];
    let mut rows = 0usize;
    let mut x = vec![0.0; lags];
    for s in series {
        if s.len() <= lags + 1 {
            return Err(ValidateError::SeriesTooShort { len: s.len(), lags });
        }
        let m = mean(s);
        let scale = if m.abs() > 0.0 { 1.0 / m } else { 1.0 };
        let z: Vec<f64> = s.iter().map(|v| v * scale).collect();
        for t in lags..z.len() {
            for k in 0..lags {
                x[k] = z[t - 1 - k];
            }
            for i in 0..lags {
                let xi = x[i];
                rhs[i] += xi * z[t];
                for j in 0..lags {
                    gram[i * lags + j] += xi * x[j];
                }
            }
            rows += 1;
        }
    }
    let n = rows as f64;
    let a = Matrix::from_fn(lags, lags, |i, j| gram[i * lags + j] / n + if i == j { ridge } else { 0.0 });
    let b: Vec<f64> = rhs.iter().map(|v| v / n).collect();
    let coefficients = solve_spd(&a, &b).ok_or(ValidateError::Singular)?;
    Ok(ArModel { coefficients })
}

/// Absolute percentage errors of one-step predictions on every window.
pub fn absolute_percentage_errors(model: &ArModel, series: &[Vec<f64>]) -> Result<Vec<f64>, ValidateError> {
    let p = model.lags();
    let mut ape = Vec::new();
    for s in series {
        if s.len() <= p + 1 {
            return Err(ValidateError::SeriesTooShort { len: s.len(), lags: p });
        }
        for t in p..s.len() {
            let pred = model.predict_next(&s[..t]);
            ape.push(100.0 * (pred - s[t]).abs() / s[t].abs().max(f64::MIN_POSITIVE));
        }
    }
    Ok(ape)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForecastReport {
    pub train_source: String,
    pub test_source: String,
    pub mean_ape_pct: f64,
    pub std_ape_pct: f64,
    pub n_predictions: usize,
}

impl ForecastReport {
    pub fn tagged(mut self, train: &str, test: &str) -> Self {
        self.train_source = train.to_string();
        self.test_source = test.to_string();
        self
    }
}

/// Fits AR(`lags`) on `train` and scores one-step predictions on `test`.
pub fn ar_forecast_eval(train: &[Vec<f64>], test: &[Vec<f64>], lags: usize) -> Result<ForecastReport, ValidateError> {
    let model = fit_ar(train, lags, AR_RIDGE)?;
    if test.is_empty() {
        return Err(ValidateError::EmptyInput);
    }
    let ape = absolute_percentage_errors(&model, test)?;
    if ape.len() < MIN_PREDICTIONS {
        return Err(ValidateError::TooFewPredictions(ape.len()));
    }
    Ok(ForecastReport {
        train_source: "train".into(),
        test_source: "test".into(),
        mean_ape_pct: mean(&ape),
        std_ape_pct: std_dev(&ape),
        n_predictions: ape.len(),
    })
}

/// Residual of the ridge normal equations, relative to the right-hand side.
#[cfg(test)]
fn normal_equation_residual(series: &[Vec<f64>], model: &ArModel) -> f64 {
    let p = model.lags();
    let mut grad = vec![0.0; p];
    let mut rhs_norm = 0.0;
    let mut n = 0.0;
    for s in series {
        let m = mean(s);
        let z: Vec<f64> = s.iter().map(|v| v / m).collect();
        for t in p..z.len() {
            let x: Vec<f64> = (0..p).map(|k| z[t - 1 - k]).collect();
            let r = crate::scalar::dot(&x, &model.coefficients) - z[t];
            for k in 0..p {
                grad[k] += x[k] * r;
                rhs_norm += (x[k] * z[t]).abs();
            }
            n += 1.0;
        }
    }
    grad.iter().zip(&model.coefficients).map(|(g, w)| (g / n + AR_RIDGE * w).abs()).sum::<f64>() / (rhs_norm / n)
}
