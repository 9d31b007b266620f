//! Boruta all-relevant feature selection.
//!
//! Each iteration appends one shuffled "shadow" copy of every feature,
//! fits a random forest on the combined matrix, and scores a *hit* for every
//! real feature whose importance exceeds the best shadow importance. After
//! `n_iter` rounds, each feature's hit count is tested against a Binomial
//! (n_iter, 1/2) null with an exact two-sided test: significantly many hits
//! confirms the feature, significantly few rejects it, anything else stays
//! tentative.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use tla_core::Real;

use crate::error::{MlError, Result};
use crate::matrix::FeatureMatrix;
use crate::rng::derive_seed;
use crate::tree::{fit_forest, validate_xy, RfParams};

/// Name prefix that marks shadow columns inside the internal forest.
const SHADOW_PREFIX: &str = "shadow__";

/// Configuration for a Boruta run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BorutaParams {
    /// Number of shadow iterations. Zero leaves every feature tentative.
    pub n_iter: usize,
    /// Two-sided significance level in (0, 1).
    pub alpha: f64,
    /// Master seed for shuffles and the internal forests.
    pub seed: u64,
}

impl Default for BorutaParams {
    fn default() -> Self {
        BorutaParams {
            n_iter: 100,
            alpha: 0.05,
            seed: 0,
        }
    }
}

/// Verdict for one feature.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BorutaDecision {
    /// Significantly more hits than chance: keep.
    Confirmed,
    /// No significant evidence either way.
    Tentative,
    /// Significantly fewer hits than chance: drop.
    Rejected,
}

/// Outcome of a Boruta run, in training column order.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BorutaResult {
    names: Vec<String>,
    hits: Vec<usize>,
    p_values: Vec<f64>,
    decisions: Vec<BorutaDecision>,
    n_iter: usize,
}

impl BorutaResult {
    /// (feature, decision) pairs in training column order.
    pub fn decisions(&self) -> Vec<(String, BorutaDecision)> {
        self.names
            .iter()
            .cloned()
            .zip(self.decisions.iter().copied())
            .collect()
    }

    /// Names of confirmed features, in training column order.
    pub fn confirmed(&self) -> Vec<String> {
        self.filter(BorutaDecision::Confirmed)
    }

    /// Names of tentative features, in training column order.
    pub fn tentative(&self) -> Vec<String> {
        self.filter(BorutaDecision::Tentative)
    }

    fn filter(&self, want: BorutaDecision) -> Vec<String> {
        self.names
            .iter()
            .zip(&self.decisions)
            .filter(|(_, &d)| d == want)
            .map(|(n, _)| n.clone())
            .collect()
    }

    /// Hit count per feature, parallel to `decisions()`.
    pub fn hits(&self) -> &[usize] {
        &self.hits
    }

    /// Two-sided binomial p-value per feature, parallel to `decisions()`.
    pub fn p_values(&self) -> &[f64] {
        &self.p_values
    }

    /// Number of iterations actually run.
    pub fn n_iter(&self) -> usize {
        self.n_iter
    }
}

/// The fixed forest used to score importances inside Boruta.
fn internal_forest_params<T: Real>(seed: u64) -> RfParams<T> {
    RfParams {
        n_trees: 100,
        max_depth: 7,
        min_leaf: 2,
        feature_frac: T::of(1.0 / 3.0),
        bootstrap: true,
        seed,
    }
}

/// Runs Boruta selection on `x` against `y`.
pub fn boruta<T: Real>(x: &FeatureMatrix<T>, y: &[T], params: &BorutaParams) -> Result<BorutaResult> {
    validate_xy(x, y)?;
    if x.n_cols() < 2 {
        return Err(MlError::InsufficientData(
            "boruta needs at least 2 features".into(),
        ));
    }
    if x.n_rows() < 20 {
        return Err(MlError::InsufficientData(format!(
            "boruta needs at least 20 samples, got {}",
            x.n_rows()
        )));
    }
    if !(params.alpha > 0.0 && params.alpha < 1.0) {
        return Err(MlError::InvalidParam(format!(
            "alpha must be in (0, 1), got {}",
            params.alpha
        )));
    }
    if x.names().iter().any(|n| n.starts_with(SHADOW_PREFIX)) {
        return Err(MlError::InvalidParam(format!(
            "feature names must not start with '{SHADOW_PREFIX}'"
        )));
    }

    let p = x.n_cols();

    // Iterations are independent given their derived seeds, so running them
    // in parallel and summing hit vectors is schedule-deterministic.
    let iter_hits: Vec<Vec<bool>> = (0..params.n_iter)
        .into_par_iter()
        .map(|iter| -> Result<Vec<bool>> {
            // Shadow copies: same marginals, shuffled rows, prefixed names.
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(
                params.seed,
                &[b"iter", &(iter as u64).to_le_bytes()],
            ));
            let mut shadow_cols: Vec<(String, Vec<T>)> = Vec::with_capacity(p);
            for (j, name) in x.names().iter().enumerate() {
                let mut col = x.column(j);
                col.shuffle(&mut rng);
                shadow_cols.push((format!("{SHADOW_PREFIX}{name}"), col));
            }
            let shadows = FeatureMatrix::from_columns(shadow_cols)?;
            let combined = x.hstack(&shadows)?;

            let rf_seed = derive_seed(params.seed, &[b"forest", &(iter as u64).to_le_bytes()]);
            let forest = fit_forest(&combined, y, &internal_forest_params::<T>(rf_seed))?;
            // Out-of-bag permutation Z-scores: in-bag luck does not carry to
            // OOB rows, so a real noise feature and its fresh shadows stay
            // exchangeable across iterations (plain split-gain totals would
            // let one lucky draw win every round).
            let perm_seed = derive_seed(params.seed, &[b"permute", &(iter as u64).to_le_bytes()]);
            let importances = forest.oob_importance(&combined, y, perm_seed)?;

            let max_shadow = importances
                .iter()
                .filter(|(name, _)| name.starts_with(SHADOW_PREFIX))
                .map(|&(_, v)| v)
                .fold(T::zero(), |a, b| if b > a { b } else { a });
            Ok(x
                .names()
                .iter()
                .map(|name| {
                    let real = importances
                        .iter()
                        .find(|(n, _)| n == name)
                        .map(|&(_, v)| v)
                        .expect("real feature present");
                    real > max_shadow
                })
                .collect())
        })
        .collect::<Result<_>>()?;

    let mut hits = vec![0usize; p];
    for row in &iter_hits {
        for (h, &hit) in hits.iter_mut().zip(row) {
            *h += hit as usize;
        }
    }

    let mut p_values = Vec::with_capacity(p);
    let mut decisions = Vec::with_capacity(p);
    for &h in &hits {
        if params.n_iter == 0 {
            p_values.push(1.0);
            decisions.push(BorutaDecision::Tentative);
            continue;
        }
        let pv = binomial_two_sided(params.n_iter, h);
        p_values.push(pv);
        let d = if pv < params.alpha {
            if 2 * h > params.n_iter {
                BorutaDecision::Confirmed
            } else {
                BorutaDecision::Rejected
            }
        } else {
            BorutaDecision::Tentative
        };
        decisions.push(d);
    }

    Ok(BorutaResult {
        names: x.names().to_vec(),
        hits,
        p_values,
        decisions,
        n_iter: params.n_iter,
    })
}

/// Exact two-sided binomial test for `h` successes in `n` fair trials:
/// `min(1, 2·min(P(X ≤ h), P(X ≥ h)))`, computed from log-factorials.
pub(crate) fn binomial_two_sided(n: usize, h: usize) -> f64 {
    debug_assert!(h <= n);
    // log(k!) table.
    let mut log_fact = vec![0.0f64; n + 1];
    for k in 1..=n {
        log_fact[k] = log_fact[k - 1] + (k as f64).ln();
    }
    let log_half_n = n as f64 * 0.5f64.ln();
    let pmf = |k: usize| (log_fact[n] - log_fact[k] - log_fact[n - k] + log_half_n).exp();
    let lower: f64 = (0..=h).map(pmf).sum();
    let upper: f64 = (h..=n).map(pmf).sum();
    (2.0 * lower.min(upper)).min(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    /// One strong linear signal plus one pure-noise column.
    fn signal_and_noise(n: usize, seed: u64) -> (FeatureMatrix<f64>, Vec<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let names = vec!["signal".to_string(), "noise".to_string()];
        let mut data = Vec::with_capacity(n * 2);
        let mut y = Vec::with_capacity(n);
        for _ in 0..n {
            let s: f64 = rng.gen_range(-1.0..1.0);
            data.push(s);
            data.push(rng.gen_range(-1.0..1.0));
            y.push(3.0 * s + 0.1 * rng.gen_range(-1.0..1.0));
        }
        (FeatureMatrix::new(names, data, n).unwrap(), y)
    }

    #[test]
    fn binomial_p_values_match_hand_computation() {
        // n = 10, h = 10: P(X ≥ 10) = 1/1024, doubled.
        assert!((binomial_two_sided(10, 10) - 2.0 / 1024.0).abs() < 1e-12);
        // n = 10, h = 0 is symmetric.
        assert!((binomial_two_sided(10, 0) - 2.0 / 1024.0).abs() < 1e-12);
        // n = 10, h = 5: P(X ≤ 5) = 638/1024, doubled and clipped to 1.
        assert_eq!(binomial_two_sided(10, 5), 1.0);
        // n = 20, h = 15: P(X ≥ 15) = (15504+4845+1140+190+20+1)/2^20.
        let want = 2.0 * 21700.0 / 1048576.0;
        assert!((binomial_two_sided(20, 15) - want).abs() < 1e-12);
    }

    #[test]
    fn confirms_signal_and_rejects_noise_across_seeds() {
        let mut agreements = 0;
        for seed in 0..10u64 {
            let (x, y) = signal_and_noise(200, 1000 + seed);
            let params = BorutaParams {
                n_iter: 100,
                alpha: 0.05,
                seed,
            };
            let result = boruta(&x, &y, &params).unwrap();
            let map: std::collections::HashMap<_, _> = result.decisions().into_iter().collect();
            let ok = map["signal"] == BorutaDecision::Confirmed
                && map["noise"] == BorutaDecision::Rejected;
            agreements += ok as usize;
        }
        assert!(agreements >= 9, "only {agreements}/10 seeds agreed");
    }

    #[test]
    fn pure_noise_confirms_nothing() {
        for seed in 0..5u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(7000 + seed);
            let n = 200;
            let names: Vec<String> = (0..3).map(|j| format!("f{j}")).collect();
            let data: Vec<f64> = (0..n * 3).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let y: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let x = FeatureMatrix::new(names, data, n).unwrap();
            let params = BorutaParams {
                n_iter: 60,
                alpha: 0.05,
                seed,
            };
            let result = boruta(&x, &y, &params).unwrap();
            assert!(
                result.confirmed().is_empty(),
                "seed {seed} confirmed {:?}",
                result.confirmed()
            );
        }
    }

    #[test]
    fn zero_iterations_leaves_everything_tentative() {
        let (x, y) = signal_and_noise(50, 42);
        let params = BorutaParams {
            n_iter: 0,
            ..BorutaParams::default()
        };
        let result = boruta(&x, &y, &params).unwrap();
        for (_, d) in result.decisions() {
            assert_eq!(d, BorutaDecision::Tentative);
        }
        assert!(result.hits().iter().all(|&h| h == 0));
    }

    #[test]
    fn runs_are_deterministic() {
        let (x, y) = signal_and_noise(60, 3);
        let params = BorutaParams {
            n_iter: 10,
            alpha: 0.05,
            seed: 11,
        };
        let a = boruta(&x, &y, &params).unwrap();
        let b = boruta(&x, &y, &params).unwrap();
        assert_eq!(a.hits(), b.hits());
        assert_eq!(a.decisions(), b.decisions());
    }

    #[test]
    fn input_validation() {
        let (x, y) = signal_and_noise(60, 4);
        // Too few samples.
        let (xs, ys) = signal_and_noise(19, 4);
        assert!(boruta(&xs, &ys, &BorutaParams::default()).is_err());
        // Too few features.
        let x1 = x.select_columns(&["signal".into()]).unwrap();
        assert!(boruta(&x1, &y, &BorutaParams::default()).is_err());
        // Bad alpha.
        let bad = BorutaParams {
            alpha: 0.0,
            ..BorutaParams::default()
        };
        assert!(boruta(&x, &y, &bad).is_err());
        // Reserved name prefix.
        let clash = FeatureMatrix::new(
            vec!["shadow__x".into(), "b".into()],
            vec![0.0; 40 * 2],
            40,
        );
        // Constant columns are fine for the matrix itself; the name clash
        // must be the rejection reason.
        let clash = clash.unwrap();
        let yc = vec![0.0; 40];
        match boruta(&clash, &yc, &BorutaParams::default()) {
            Err(MlError::InvalidParam(msg)) => assert!(msg.contains("shadow__")),
            other => panic!("expected name-clash rejection, got {other:?}"),
        }
    }
}
