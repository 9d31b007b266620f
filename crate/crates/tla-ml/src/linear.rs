//! Linear regressors: ordinary least squares (MLR), Ridge, Lasso, and
//! Elastic Net.
//!
//! All fitters center the design and target internally, so the intercept is
//! never penalized. Penalized objectives use the unnormalized convention
//!
//! L(β) = ½‖y − Xβ‖² + λ·[ mix·Σ|βⱼ| + ½(1 − mix)·Σβⱼ² ]
//!
//! so that on an orthonormal design the Lasso solution is exactly the
//! soft-thresholded OLS coefficient, Ridge is the `mix = 0` case with the
//! closed form (XᵀX + λI)⁻¹Xᵀy, and Lasso is `mix = 1`.

use serde::{Deserialize, Serialize};
use tla_core::Real;

use crate::error::{MlError, Result};
use crate::matrix::FeatureMatrix;

/// Fitted linear model: one coefficient per input column plus an intercept.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Serialize + serde::de::DeserializeOwned")]
pub struct LinearModel<T> {
    pub coefficients: Vec<T>,
    pub intercept: T,
}

impl<T: Real> LinearModel<T> {
    pub fn predict_row(&self, row: &[T]) -> T {
        debug_assert_eq!(row.len(), self.coefficients.len());
        row.iter()
            .zip(&self.coefficients)
            .map(|(&x, &b)| x * b)
            .sum::<T>()
            + self.intercept
    }

    pub fn predict(&self, x: &FeatureMatrix<T>) -> Result<Vec<T>> {
        if x.n_cols() != self.coefficients.len() {
            return Err(MlError::BadMatrix(format!(
                "model has {} coefficients but matrix has {} columns",
                self.coefficients.len(),
                x.n_cols()
            )));
        }
        Ok((0..x.n_rows()).map(|r| self.predict_row(x.row(r))).collect())
    }
}

/// MLR result: the model plus the numerical rank of the design.
#[derive(Debug, Clone)]
pub struct MlrFit<T> {
    pub model: LinearModel<T>,
    /// Numerical rank of the centered design's Gram matrix.
    pub rank: usize,
    /// Non-empty when the system was singular and the minimum-norm solution
    /// was returned.
    pub warnings: Vec<String>,
}

struct Centered<T> {
    xc: Vec<T>, // row-major, n × p
    yc: Vec<T>,
    x_mean: Vec<T>,
    y_mean: T,
    n: usize,
    p: usize,
}

fn center<T: Real>(x: &FeatureMatrix<T>, y: &[T]) -> Result<Centered<T>> {
    let n = x.n_rows();
    let p = x.n_cols();
    if y.len() != n {
        return Err(MlError::LengthMismatch(format!(
            "matrix has {n} rows but target has {} entries",
            y.len()
        )));
    }
    if n == 0 {
        return Err(MlError::InsufficientData("cannot fit on zero samples".into()));
    }
    let nf = T::of_usize(n);
    let mut x_mean = vec![T::zero(); p];
    for r in 0..n {
        for (c, m) in x_mean.iter_mut().enumerate() {
            *m += x.get(r, c);
        }
    }
    for m in &mut x_mean {
        *m /= nf;
    }
    let y_mean = y.iter().copied().sum::<T>() / nf;

    let mut xc = Vec::with_capacity(n * p);
    for r in 0..n {
        for c in 0..p {
            xc.push(x.get(r, c) - x_mean[c]);
        }
    }
    let yc = y.iter().map(|&v| v - y_mean).collect();
    Ok(Centered {
        xc,
        yc,
        x_mean,
        y_mean,
        n,
        p,
    })
}

fn finish<T: Real>(c: &Centered<T>, beta: Vec<T>) -> LinearModel<T> {
    let intercept = c.y_mean
        - beta
            .iter()
            .zip(&c.x_mean)
            .map(|(&b, &m)| b * m)
            .sum::<T>();
    LinearModel {
        coefficients: beta,
        intercept,
    }
}

/// Gram matrix XᵀX (p×p) and moment vector Xᵀy of the centered data.
fn gram<T: Real>(c: &Centered<T>) -> (Vec<T>, Vec<T>) {
    let (n, p) = (c.n, c.p);
    let mut a = vec![T::zero(); p * p];
    let mut b = vec![T::zero(); p];
    for r in 0..n {
        let row = &c.xc[r * p..(r + 1) * p];
        for i in 0..p {
            b[i] += row[i] * c.yc[r];
            for j in i..p {
                a[i * p + j] += row[i] * row[j];
            }
        }
    }
    for i in 0..p {
        for j in 0..i {
            a[i * p + j] = a[j * p + i];
        }
    }
    (a, b)
}

/// Jacobi eigendecomposition of a symmetric p×p matrix (row-major).
/// Returns (eigenvalues, eigenvectors as columns, both unsorted).
fn sym_eigh<T: Real>(mut a: Vec<T>, p: usize) -> (Vec<T>, Vec<T>) {
    let mut v = vec![T::zero(); p * p];
    for i in 0..p {
        v[i * p + i] = T::one();
    }
    for _sweep in 0..200 {
        let mut off = T::zero();
        for i in 0..p {
            for j in (i + 1)..p {
                off += a[i * p + j] * a[i * p + j];
            }
        }
        let diag: T = (0..p).map(|i| a[i * p + i] * a[i * p + i]).sum();
        if off <= (diag + off) * T::epsilon() * T::epsilon() || off == T::zero() {
            break;
        }
        for i in 0..p {
            for j in (i + 1)..p {
                let apq = a[i * p + j];
                if apq == T::zero() {
                    continue;
                }
                let app = a[i * p + i];
                let aqq = a[j * p + j];
                let theta = (aqq - app) / (T::two() * apq);
                let t = {
                    let sign = if theta >= T::zero() { T::one() } else { -T::one() };
                    sign / (theta.abs() + (T::one() + theta * theta).sqrt())
                };
                let cos = T::one() / (T::one() + t * t).sqrt();
                let sin = t * cos;
                // Rotate rows/columns i and j of A.
                for k in 0..p {
                    let aik = a[i * p + k];
                    let ajk = a[j * p + k];
                    a[i * p + k] = cos * aik - sin * ajk;
                    a[j * p + k] = sin * aik + cos * ajk;
                }
                for k in 0..p {
                    let aki = a[k * p + i];
                    let akj = a[k * p + j];
                    a[k * p + i] = cos * aki - sin * akj;
                    a[k * p + j] = sin * aki + cos * akj;
                }
                // Accumulate the rotation into V (columns are eigenvectors).
                for k in 0..p {
                    let vki = v[k * p + i];
                    let vkj = v[k * p + j];
                    v[k * p + i] = cos * vki - sin * vkj;
                    v[k * p + j] = sin * vki + cos * vkj;
                }
            }
        }
    }
    let vals = (0..p).map(|i| a[i * p + i]).collect();
    (vals, v)
}

/// Ordinary least squares through the pseudo-inverse of the Gram matrix:
/// singular systems yield the minimum-norm solution and a rank warning.
pub fn fit_mlr<T: Real>(x: &FeatureMatrix<T>, y: &[T]) -> Result<MlrFit<T>> {
    let c = center(x, y)?;
    let (a, b) = gram(&c);
    let p = c.p;
    let (vals, vecs) = sym_eigh(a, p);
    let max_val = vals.iter().fold(T::zero(), |m, &v| m.max(v.abs()));
    let tol = max_val * T::of_usize(p.max(1)) * T::epsilon() * T::of(100.0);

    // β = V diag(1/λ over the numerical range) Vᵀ b — the pseudo-inverse
    // applied to Xᵀy, i.e. the minimum-norm least-squares solution.
    let mut rank = 0;
    let mut beta = vec![T::zero(); p];
    for e in 0..p {
        if vals[e].abs() <= tol || vals[e] <= T::zero() {
            continue;
        }
        rank += 1;
        let ve: Vec<T> = (0..p).map(|k| vecs[k * p + e]).collect();
        let proj = ve.iter().zip(&b).map(|(&vk, &bk)| vk * bk).sum::<T>() / vals[e];
        for k in 0..p {
            beta[k] += ve[k] * proj;
        }
    }
    let mut warnings = Vec::new();
    if rank < p {
        warnings.push(format!(
            "design is rank-deficient (rank {rank} of {p}); returning the minimum-norm solution"
        ));
    }
    Ok(MlrFit {
        model: finish(&c, beta),
        rank,
        warnings,
    })
}

/// Ridge regression, closed form: β = (XᵀX + λI)⁻¹ Xᵀy on centered data.
pub fn fit_ridge<T: Real>(x: &FeatureMatrix<T>, y: &[T], lambda: T) -> Result<LinearModel<T>> {
    if lambda < T::zero() {
        return Err(MlError::InvalidParam(format!(
            "ridge lambda must be non-negative, got {lambda}"
        )));
    }
    let c = center(x, y)?;
    let (mut a, b) = gram(&c);
    let p = c.p;
    for i in 0..p {
        a[i * p + i] += lambda;
    }
    let beta = solve_gauss(a, b, p).ok_or_else(|| {
        MlError::DegenerateTarget(
            "ridge system is singular (try a positive lambda or drop constant columns)".into(),
        )
    })?;
    Ok(finish(&c, beta))
}

/// Gaussian elimination with partial pivoting; `None` when singular.
fn solve_gauss<T: Real>(mut a: Vec<T>, mut b: Vec<T>, p: usize) -> Option<Vec<T>> {
    for col in 0..p {
        let pivot_row = (col..p)
            .max_by(|&i, &j| {
                a[i * p + col]
                    .abs()
                    .partial_cmp(&a[j * p + col].abs())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .unwrap();
        if a[pivot_row * p + col].abs() <= T::epsilon() * T::of(1e3) * T::zero().max(T::one()) {
            // Near-zero pivot relative to unit scale; check absolute.
            if a[pivot_row * p + col] == T::zero() {
                return None;
            }
        }
        if pivot_row != col {
            for k in 0..p {
                a.swap(col * p + k, pivot_row * p + k);
            }
            b.swap(col, pivot_row);
        }
        let pivot = a[col * p + col];
        if pivot == T::zero() {
            return None;
        }
        for row in (col + 1)..p {
            let f = a[row * p + col] / pivot;
            if f == T::zero() {
                continue;
            }
            for k in col..p {
                let v = a[col * p + k];
                a[row * p + k] -= f * v;
            }
            let bc = b[col];
            b[row] -= f * bc;
        }
    }
    let mut xout = vec![T::zero(); p];
    for col in (0..p).rev() {
        let mut s = b[col];
        for k in (col + 1)..p {
            s -= a[col * p + k] * xout[k];
        }
        let pivot = a[col * p + col];
        if pivot == T::zero() {
            return None;
        }
        xout[col] = s / pivot;
    }
    Some(xout)
}

fn soft_threshold<T: Real>(v: T, t: T) -> T {
    if v > t {
        v - t
    } else if v < -t {
        v + t
    } else {
        T::zero()
    }
}

/// Cyclic coordinate descent for the elastic-net objective. Returns the
/// coefficient vector and the objective value after each full cycle.
fn coordinate_descent<T: Real>(
    c: &Centered<T>,
    lambda: T,
    mix: T,
    tol: T,
    max_cycles: usize,
) -> (Vec<T>, Vec<T>) {
    let (n, p) = (c.n, c.p);
    let col = |j: usize, r: usize| c.xc[r * p + j];
    let d: Vec<T> = (0..p)
        .map(|j| (0..n).map(|r| col(j, r) * col(j, r)).sum())
        .collect();

    let mut beta = vec![T::zero(); p];
    let mut resid: Vec<T> = c.yc.clone();
    let objective = |beta: &[T], resid: &[T]| {
        let rss: T = resid.iter().map(|&r| r * r).sum();
        let l1: T = beta.iter().map(|&b| b.abs()).sum();
        let l2: T = beta.iter().map(|&b| b * b).sum();
        rss * T::half() + lambda * (mix * l1 + T::half() * (T::one() - mix) * l2)
    };

    let mut trace = Vec::new();
    for _cycle in 0..max_cycles {
        let mut max_delta = T::zero();
        for j in 0..p {
            if d[j] == T::zero() {
                continue;
            }
            // ρ = xⱼᵀ r + dⱼ βⱼ (the partial residual correlation).
            let mut rho = d[j] * beta[j];
            for r in 0..n {
                rho += col(j, r) * resid[r];
            }
            let new = soft_threshold(rho, lambda * mix) / (d[j] + lambda * (T::one() - mix));
            let delta = new - beta[j];
            if delta != T::zero() {
                for r in 0..n {
                    resid[r] -= col(j, r) * delta;
                }
                beta[j] = new;
                max_delta = max_delta.max(delta.abs());
            }
        }
        trace.push(objective(&beta, &resid));
        if max_delta < tol {
            break;
        }
    }
    (beta, trace)
}

/// Elastic net: `mix = 1` is the Lasso, `mix = 0` is Ridge.
pub fn fit_enr<T: Real>(
    x: &FeatureMatrix<T>,
    y: &[T],
    lambda: T,
    mix: T,
) -> Result<LinearModel<T>> {
    if lambda < T::zero() {
        return Err(MlError::InvalidParam(format!(
            "elastic-net lambda must be non-negative, got {lambda}"
        )));
    }
    if !(T::zero()..=T::one()).contains(&mix) {
        return Err(MlError::InvalidParam(format!(
            "elastic-net mix must be in [0, 1], got {mix}"
        )));
    }
    let c = center(x, y)?;
    let (beta, _) = coordinate_descent(&c, lambda, mix, T::of(1e-8), 100_000);
    Ok(finish(&c, beta))
}

/// Lasso: elastic net at `mix = 1`.
pub fn fit_lasso<T: Real>(x: &FeatureMatrix<T>, y: &[T], lambda: T) -> Result<LinearModel<T>> {
    fit_enr(x, y, lambda, T::one())
}
