use serde::{Deserialize, Serialize};

use super::MetricsError;
use crate::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegressionMetrics<F> {
    pub mse: F,
    pub mae: F,
    /// `1 - SSE / SST`.
    pub r2: F,
    /// Mean absolute percentage error, in percent.
    pub mape_pct: F,
}

pub fn regression_metrics<F: Scalar>(y: &[F], yhat: &[F]) -> Result<RegressionMetrics<F>, MetricsError> {
    if y.len() != yhat.len() {
        return Err(MetricsError::LengthMismatch(y.len(), yhat.len()));
    }
    if y.is_empty() {
        return Err(MetricsError::Empty);
    }
    if y.iter().chain(yhat).any(|v| !v.is_finite()) {
        return Err(MetricsError::NonFinite);
    }
    if let Some(i) = y.iter().position(|v| v.is_zero()) {
        return Err(MetricsError::ZeroTargetValue(i));
    }
    let n = F::of_usize(y.len());
    let mean = y.iter().copied().sum::<F>() / n;
    let sst: F = y.iter().map(|&v| (v - mean) * (v - mean)).sum();
    if sst.is_zero() {
        return Err(MetricsError::ZeroVarianceTarget);
    }
    let sse: F = y.iter().zip(yhat).map(|(&a, &b)| (a - b) * (a - b)).sum();
    let sae: F = y.iter().zip(yhat).map(|(&a, &b)| (a - b).abs()).sum();
    let sape: F = y.iter().zip(yhat).map(|(&a, &b)| ((a - b) / a).abs()).sum();
    Ok(RegressionMetrics {
        mse: sse / n,
        mae: sae / n,
        r2: F::one() - sse / sst,
        mape_pct: F::of(100.0) * sape / n,
    })
}
