//! Column standardization: remove the mean, scale to unit variance.
//!
//! Statistics come from the training matrix only; applying the fitted
//! standardizer to any matrix uses those statistics. Population (1/n)
//! variance is used so that re-applying to the training data yields columns
//! with mean exactly 0 and standard deviation exactly 1.

use tla_core::Real;

use crate::error::{MlError, Result};
use crate::matrix::FeatureMatrix;

/// Per-column centering/scaling parameters fitted on training data.
#[derive(Debug, Clone)]
pub struct Standardizer<T> {
    /// Retained columns, in training order.
    kept: Vec<String>,
    mean: Vec<T>,
    std: Vec<T>,
    /// Zero-variance columns that were dropped during fitting.
    dropped: Vec<String>,
}

impl<T: Real> Standardizer<T> {
    /// Fits means and population standard deviations on `train`.
    /// Zero-variance columns are dropped and recorded.
    pub fn fit(train: &FeatureMatrix<T>) -> Result<Self> {
        if train.n_rows() == 0 {
            return Err(MlError::InsufficientData(
                "cannot fit a standardizer on an empty matrix".into(),
            ));
        }
        let n = T::of_usize(train.n_rows());
        let mut kept = Vec::new();
        let mut mean = Vec::new();
        let mut std = Vec::new();
        let mut dropped = Vec::new();
        for (c, name) in train.names().iter().enumerate() {
            let col = train.column(c);
            let mu = col.iter().copied().sum::<T>() / n;
            let var = col.iter().map(|&v| (v - mu) * (v - mu)).sum::<T>() / n;
            let sigma = var.sqrt();
            if sigma > T::zero() {
                kept.push(name.clone());
                mean.push(mu);
                std.push(sigma);
            } else {
                dropped.push(name.clone());
            }
        }
        if kept.is_empty() {
            return Err(MlError::DegenerateTarget(
                "every column has zero variance; nothing to standardize".into(),
            ));
        }
        Ok(Self {
            kept,
            mean,
            std,
            dropped,
        })
    }

    /// Transforms a matrix with the fitted statistics. The output contains
    /// exactly the retained columns, in training order.
    pub fn apply(&self, x: &FeatureMatrix<T>) -> Result<FeatureMatrix<T>> {
        let selected = x.select_columns(&self.kept)?;
        let mut data = Vec::with_capacity(selected.n_rows() * selected.n_cols());
        for r in 0..selected.n_rows() {
            for c in 0..selected.n_cols() {
                data.push((selected.get(r, c) - self.mean[c]) / self.std[c]);
            }
        }
        FeatureMatrix::new(self.kept.clone(), data, selected.n_rows())
    }

    pub fn kept_columns(&self) -> &[String] {
        &self.kept
    }

    pub fn dropped_columns(&self) -> &[String] {
        &self.dropped
    }

    pub fn mean(&self) -> &[T] {
        &self.mean
    }

    pub fn std(&self) -> &[T] {
        &self.std
    }
}
