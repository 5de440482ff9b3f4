//! Accuracy metrics and table summaries.

use crate::error::{Error, Result};

/// Relative root mean squared prediction error
/// `sqrt(sum (y - y_hat)^2 / sum y^2)`.
pub fn rmspe(y_true: &[f64], y_pred: &[f64]) -> Result<f64> {
    if y_true.len() != y_pred.len() {
        return Err(Error::DimensionMismatch {
            expected: y_true.len(),
            found: y_pred.len(),
        });
    }
    let denom: f64 = y_true.iter().map(|y| y * y).sum();
    if !(denom > 0.0) {
        return Err(Error::InvalidArgument("RMSPE is undefined for an all-zero response".into()));
    }
    let num: f64 = y_true.iter().zip(y_pred).map(|(y, p)| (y - p) * (y - p)).sum();
    Ok((num / denom).sqrt())
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Sample standard deviation over `sqrt(count)`.
pub fn rmspe_std_err(values: &[f64]) -> Result<f64> {
    let n = values.len();
    if n < 2 {
        return Err(Error::InvalidArgument("standard error needs at least two values".into()));
    }
    let m = mean(values);
    let var = values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1) as f64;
    Ok((var / n as f64).sqrt())
}

/// Percent difference `100 (v - best) / |best|` from the smallest value.
/// The best entry maps to 0; non-finite entries map to NaN.
pub fn pct_delta(values: &[f64]) -> Vec<f64> {
    let best = values.iter().copied().filter(|v| v.is_finite()).fold(f64::INFINITY, f64::min);
    values
        .iter()
        .map(|&v| {
            if !v.is_finite() || !best.is_finite() {
                f64::NAN
            } else if v == best {
                0.0
            } else {
                100.0 * (v - best) / best.abs()
            }
        })
        .collect()
}
