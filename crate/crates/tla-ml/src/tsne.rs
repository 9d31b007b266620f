//! Exact (O(n²)) t-SNE for 2-D visualization.
//!
//! Per-point Gaussian bandwidths are found by binary search to a target
//! perplexity, the joint distribution is symmetrized, and the embedding is
//! optimized by gradient descent on the KL divergence with the reference
//! schedule: early exaggeration ×12 for the first 250 iterations, momentum
//! 0.5 switching to 0.8 at iteration 250, learning rate 200, and per-weight
//! adaptive gains.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use tla_core::Real;

use crate::error::{MlError, Result};
use crate::matrix::FeatureMatrix;
use crate::rng::derive_seed;

/// Parameters for a t-SNE run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TsneParams<T> {
    /// Target perplexity; auto-clamped to `(n − 1) / 3`.
    pub perplexity: T,
    /// Gradient-descent iterations.
    pub iters: usize,
    /// Step size (the reference schedule uses 200).
    pub learning_rate: T,
    /// Seed for the Gaussian initialization.
    pub seed: u64,
}

impl<T: Real> Default for TsneParams<T> {
    fn default() -> Self {
        TsneParams {
            perplexity: T::of(30.0),
            iters: 1000,
            learning_rate: T::of(200.0),
            seed: 0,
        }
    }
}

/// Output of a t-SNE run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TsneResult<T> {
    /// One 2-D point per input row.
    pub embedding: Vec<[T; 2]>,
    /// KL divergence against the *unexaggerated* target distribution after
    /// each iteration, so values are comparable across the whole run.
    pub kl_trace: Vec<T>,
}

/// Number of early iterations with exaggerated attractive forces and the
/// lower momentum.
const SWITCH_ITER: usize = 250;
const EXAGGERATION: f64 = 12.0;
const P_FLOOR: f64 = 1e-12;

/// Embeds the rows of `x` into 2-D.
pub fn tsne<T: Real>(x: &FeatureMatrix<T>, params: &TsneParams<T>) -> Result<TsneResult<T>> {
    let n = x.n_rows();
    if n < 5 {
        return Err(MlError::InsufficientData(format!(
            "t-SNE needs at least 5 points, got {n}"
        )));
    }
    if !(params.perplexity > T::one()) {
        return Err(MlError::InvalidParam(format!(
            "perplexity must exceed 1, got {}",
            params.perplexity
        )));
    }
    if !(params.learning_rate > T::zero()) {
        return Err(MlError::InvalidParam(format!(
            "learning_rate must be positive, got {}",
            params.learning_rate
        )));
    }
    for r in 0..n {
        if x.row(r).iter().any(|v| !v.is_finite()) {
            return Err(MlError::BadMatrix(
                "t-SNE input contains a non-finite value".into(),
            ));
        }
    }

    let max_perp = T::of_usize(n - 1) / T::of(3.0);
    let perplexity = if params.perplexity < max_perp {
        params.perplexity
    } else {
        max_perp
    };

    // Pairwise squared distances.
    let mut d2 = vec![T::zero(); n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let (a, b) = (x.row(i), x.row(j));
            let mut s = T::zero();
            for (va, vb) in a.iter().zip(b.iter()) {
                let d = *va - *vb;
                s += d * d;
            }
            d2[i * n + j] = s;
            d2[j * n + i] = s;
        }
    }

    let p = joint_probabilities(&d2, n, perplexity);

    // Gaussian init, σ = 1e-4.
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(params.seed, &[b"tsne-init"]));
    let sigma = T::of(1e-4);
    let mut y: Vec<[T; 2]> = (0..n)
        .map(|_| [sigma * gaussian(&mut rng), sigma * gaussian(&mut rng)])
        .collect();

    let mut velocity = vec![[T::zero(); 2]; n];
    let mut gains = vec![[T::one(); 2]; n];
    let mut grad = vec![[T::zero(); 2]; n];
    let mut w = vec![T::zero(); n * n];
    let mut kl_trace = Vec::with_capacity(params.iters);
    let floor = T::of(P_FLOOR);
    let min_gain = T::of(0.01);

    for iter in 0..params.iters {
        let exaggeration = if iter < SWITCH_ITER {
            T::of(EXAGGERATION)
        } else {
            T::one()
        };
        let momentum = if iter < SWITCH_ITER {
            T::half()
        } else {
            T::of(0.8)
        };

        // Student-t weights and their total.
        let mut w_sum = T::zero();
        for i in 0..n {
            for j in (i + 1)..n {
                let dx = y[i][0] - y[j][0];
                let dy = y[i][1] - y[j][1];
                let wij = T::one() / (T::one() + dx * dx + dy * dy);
                w[i * n + j] = wij;
                w[j * n + i] = wij;
                w_sum += wij + wij;
            }
        }

        // Gradient: 4·Σⱼ (p̃ᵢⱼ − qᵢⱼ)·wᵢⱼ·(yᵢ − yⱼ), p̃ exaggerated.
        for g in grad.iter_mut() {
            *g = [T::zero(); 2];
        }
        let four = T::of(4.0);
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let wij = w[i * n + j];
                let qij = wij / w_sum;
                let mult = four * (exaggeration * p[i * n + j] - qij) * wij;
                grad[i][0] += mult * (y[i][0] - y[j][0]);
                grad[i][1] += mult * (y[i][1] - y[j][1]);
            }
        }

        // Adaptive gains and the momentum step (reference schedule).
        for i in 0..n {
            for c in 0..2 {
                let same_sign = (grad[i][c] > T::zero()) == (velocity[i][c] > T::zero());
                gains[i][c] = if same_sign {
                    let g = gains[i][c] * T::of(0.8);
                    if g < min_gain {
                        min_gain
                    } else {
                        g
                    }
                } else {
                    gains[i][c] + T::of(0.2)
                };
                velocity[i][c] =
                    momentum * velocity[i][c] - params.learning_rate * gains[i][c] * grad[i][c];
                y[i][c] += velocity[i][c];
            }
        }

        // Re-center the embedding.
        let mut mean = [T::zero(); 2];
        for yi in &y {
            mean[0] += yi[0];
            mean[1] += yi[1];
        }
        let inv_n = T::one() / T::of_usize(n);
        mean[0] *= inv_n;
        mean[1] *= inv_n;
        for yi in y.iter_mut() {
            yi[0] -= mean[0];
            yi[1] -= mean[1];
        }

        // KL against the true (unexaggerated) P at the updated embedding.
        let mut w_sum_new = T::zero();
        for i in 0..n {
            for j in (i + 1)..n {
                let dx = y[i][0] - y[j][0];
                let dy = y[i][1] - y[j][1];
                let wij = T::one() / (T::one() + dx * dx + dy * dy);
                w[i * n + j] = wij;
                w[j * n + i] = wij;
                w_sum_new += wij + wij;
            }
        }
        let mut kl = T::zero();
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let pij = p[i * n + j];
                let qij = {
                    let q = w[i * n + j] / w_sum_new;
                    if q > floor {
                        q
                    } else {
                        floor
                    }
                };
                kl += pij * (pij / qij).ln();
            }
        }
        if !kl.is_finite() {
            return Err(MlError::Diverged(format!(
                "t-SNE KL divergence became non-finite at iteration {iter}"
            )));
        }
        kl_trace.push(kl);
    }

    Ok(TsneResult {
        embedding: y,
        kl_trace,
    })
}

/// Symmetrized joint probabilities from squared distances: per-row binary
/// search for the Gaussian bandwidth matching `ln(perplexity)` entropy
/// (tolerance 1e-5, ≤ 50 halvings), then `P = (P + Pᵀ) / 2n`, floored.
fn joint_probabilities<T: Real>(d2: &[T], n: usize, perplexity: T) -> Vec<T> {
    let target = perplexity.ln();
    let tol = T::of(1e-5);
    let mut cond = vec![T::zero(); n * n];
    let mut e = vec![T::zero(); n];

    for i in 0..n {
        let mut beta = T::one();
        let mut beta_min: Option<T> = None;
        let mut beta_max: Option<T> = None;

        // Shift by the smallest off-diagonal distance so the largest term
        // is exp(0) = 1 and the normalizer never underflows.
        let mut d_min = T::infinity();
        for j in 0..n {
            if j != i && d2[i * n + j] < d_min {
                d_min = d2[i * n + j];
            }
        }

        for _ in 0..50 {
            let mut sum = T::zero();
            let mut moment = T::zero();
            for j in 0..n {
                if j == i {
                    e[j] = T::zero();
                    continue;
                }
                let shifted = d2[i * n + j] - d_min;
                let v = (-beta * shifted).exp();
                e[j] = v;
                sum += v;
                moment += shifted * v;
            }
            // Entropy in nats: ln Σe + β·⟨d²⟩ (shift cancels in normalized p).
            let entropy = sum.ln() + beta * moment / sum;
            let diff = entropy - target;
            if diff.abs() < tol {
                break;
            }
            if diff > T::zero() {
                // Entropy too high → narrow the kernel.
                beta_min = Some(beta);
                beta = match beta_max {
                    Some(hi) => (beta + hi) * T::half(),
                    None => beta * T::two(),
                };
            } else {
                beta_max = Some(beta);
                beta = match beta_min {
                    Some(lo) => (beta + lo) * T::half(),
                    None => beta * T::half(),
                };
            }
        }

        let sum: T = e.iter().copied().sum();
        for j in 0..n {
            cond[i * n + j] = e[j] / sum;
        }
    }

    let floor = T::of(P_FLOOR);
    let denom = T::two() * T::of_usize(n);
    let mut p = vec![T::zero(); n * n];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let v = (cond[i * n + j] + cond[j * n + i]) / denom;
            p[i * n + j] = if v > floor { v } else { floor };
        }
    }
    p
}

/// Standard normal via Box–Muller.
fn gaussian<T: Real, R: Rng>(rng: &mut R) -> T {
    let u1: f64 = 1.0 - rng.gen::<f64>(); // in (0, 1]
    let u2: f64 = rng.gen();
    T::of((-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos())
}
