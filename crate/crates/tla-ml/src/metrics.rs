//! Regression evaluation metrics: R², MAE, bias.

use serde::{Deserialize, Serialize};
use tla_core::Real;

use crate::error::{MlError, Result};

/// All three metrics for one prediction vector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Serialize + serde::de::DeserializeOwned")]
pub struct EvalMetrics<T> {
    pub r2: T,
    pub mae: T,
    pub bias: T,
}

fn check_lengths<T>(y: &[T], y_hat: &[T]) -> Result<()> {
    if y.len() != y_hat.len() {
        return Err(MlError::LengthMismatch(format!(
            "y has {} entries, predictions {}",
            y.len(),
            y_hat.len()
        )));
    }
    if y.is_empty() {
        return Err(MlError::InsufficientData(
            "metrics need at least one sample".into(),
        ));
    }
    Ok(())
}

/// Coefficient of determination: 1 − Σ(y−ŷ)² / Σ(y−ȳ)².
/// A constant target leaves R² undefined and is reported as an error.
pub fn r2<T: Real>(y: &[T], y_hat: &[T]) -> Result<T> {
    check_lengths(y, y_hat)?;
    let n = T::of_usize(y.len());
    let mean = y.iter().copied().sum::<T>() / n;
    let ss_tot = y.iter().map(|&v| (v - mean) * (v - mean)).sum::<T>();
    if !(ss_tot > T::zero()) {
        return Err(MlError::DegenerateTarget(
            "target is constant; R² is undefined (division by zero total variance)".into(),
        ));
    }
    let ss_res = y
        .iter()
        .zip(y_hat)
        .map(|(&a, &b)| (a - b) * (a - b))
        .sum::<T>();
    Ok(T::one() - ss_res / ss_tot)
}

/// Mean absolute error.
pub fn mae<T: Real>(y: &[T], y_hat: &[T]) -> Result<T> {
    check_lengths(y, y_hat)?;
    let n = T::of_usize(y.len());
    Ok(y.iter().zip(y_hat).map(|(&a, &b)| (a - b).abs()).sum::<T>() / n)
}

/// Mean signed error: mean(ŷ − y). Positive = over-prediction.
pub fn bias<T: Real>(y: &[T], y_hat: &[T]) -> Result<T> {
    check_lengths(y, y_hat)?;
    let n = T::of_usize(y.len());
    Ok(y_hat.iter().zip(y).map(|(&p, &a)| p - a).sum::<T>() / n)
}

/// All three metrics at once.
pub fn evaluate<T: Real>(y: &[T], y_hat: &[T]) -> Result<EvalMetrics<T>> {
    Ok(EvalMetrics {
        r2: r2(y, y_hat)?,
        mae: mae(y, y_hat)?,
        bias: bias(y, y_hat)?,
    })
}
