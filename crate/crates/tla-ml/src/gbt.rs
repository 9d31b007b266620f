//! Gradient-boosted regression trees (second-order boosting, squared loss).
//!
//! Each round fits a tree to the gradient/Hessian statistics of the current
//! prediction: for squared loss `g = ŷ − y`, `h = 1`. Leaf weights are
//! `−G / (H + λ)`; a split is accepted only when
//! `½·[G_L²/(H_L+λ) + G_R²/(H_R+λ) − G²/(H+λ)] − γ > 0`.
//! All features are scanned at every node in feature-*name* order, so fitted
//! models are invariant to feature column reordering.

use serde::{Deserialize, Serialize};
use tla_core::Real;

use crate::error::{MlError, Result};
use crate::matrix::FeatureMatrix;
use crate::tree::{name_order, training_column_map, validate_xy, Node, RegressionTree};

/// Hyperparameters for gradient-boosted trees.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GbtParams<T> {
    /// Number of boosting rounds (trees).
    pub n_trees: usize,
    /// Shrinkage η applied to every tree's contribution.
    pub learning_rate: T,
    /// Maximum split depth per tree; the root is at depth 0.
    pub max_depth: usize,
    /// L2 regularization λ on leaf weights.
    pub lambda: T,
    /// Minimum gain γ a split must clear to be kept.
    pub gamma: T,
}

impl<T: Real> Default for GbtParams<T> {
    fn default() -> Self {
        GbtParams {
            n_trees: 100,
            learning_rate: T::of(0.1),
            max_depth: 3,
            lambda: T::one(),
            gamma: T::zero(),
        }
    }
}

/// A fitted gradient-boosted tree ensemble.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(bound(
    serialize = "T: Serialize",
    deserialize = "T: serde::de::DeserializeOwned"
))]
pub struct Gbt<T> {
    base: T,
    learning_rate: T,
    trees: Vec<RegressionTree<T>>,
    feature_names: Vec<String>,
    /// Raw total split gain per feature, parallel to `feature_names`.
    gain: Vec<T>,
    /// Training mean squared error after each boosting round.
    loss_trace: Vec<T>,
}

impl<T: Real> Gbt<T> {
    /// Feature names in training column order.
    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    /// Number of boosting rounds performed.
    pub fn n_trees(&self) -> usize {
        self.trees.len()
    }

    /// Training MSE after each round.
    pub fn loss_trace(&self) -> &[T] {
        &self.loss_trace
    }

    /// Per-feature importance: total split gain normalized to sum to 1
    /// (all zeros when no split was ever made).
    pub fn importance(&self) -> Vec<(String, T)> {
        let total: T = self.gain.iter().copied().sum();
        let scale = if total > T::zero() {
            T::one() / total
        } else {
            T::zero()
        };
        self.feature_names
            .iter()
            .cloned()
            .zip(self.gain.iter().map(|&g| g * scale))
            .collect()
    }

    /// Predicts targets for `x`, whose columns may be in any order but must
    /// contain every training feature by name.
    pub fn predict(&self, x: &FeatureMatrix<T>) -> Result<Vec<T>> {
        let cols = training_column_map(&self.feature_names, x)?;
        let mut buf = vec![T::zero(); self.feature_names.len()];
        Ok((0..x.n_rows())
            .map(|r| {
                let row = x.row(r);
                for (b, &c) in buf.iter_mut().zip(cols.iter()) {
                    *b = row[c];
                }
                let mut s = self.base;
                for t in &self.trees {
                    s += self.learning_rate * t.predict_row(&buf);
                }
                s
            })
            .collect())
    }
}

/// Fits a gradient-boosted tree ensemble with squared loss.
pub fn fit_gbt<T: Real>(x: &FeatureMatrix<T>, y: &[T], params: &GbtParams<T>) -> Result<Gbt<T>> {
    validate_xy(x, y)?;
    if params.n_trees == 0 {
        return Err(MlError::InvalidParam("n_trees must be at least 1".into()));
    }
    if !(params.learning_rate > T::zero() && params.learning_rate.is_finite()) {
        return Err(MlError::InvalidParam(format!(
            "learning_rate must be positive, got {}",
            params.learning_rate
        )));
    }
    if !(params.lambda >= T::zero()) {
        return Err(MlError::InvalidParam(format!(
            "lambda must be non-negative, got {}",
            params.lambda
        )));
    }
    if !(params.gamma >= T::zero()) {
        return Err(MlError::InvalidParam(format!(
            "gamma must be non-negative, got {}",
            params.gamma
        )));
    }

    let n = y.len();
    let n_t = T::of_usize(n);
    let base: T = y.iter().copied().sum::<T>() / n_t;
    let mut pred = vec![base; n];
    let mut gain = vec![T::zero(); x.n_cols()];
    let mut trees = Vec::with_capacity(params.n_trees);
    let mut loss_trace = Vec::with_capacity(params.n_trees);
    let by_name = name_order(x.names());

    for _ in 0..params.n_trees {
        // Squared loss: gradient is the residual, Hessian is one.
        let g: Vec<T> = pred.iter().zip(y).map(|(&p, &t)| p - t).collect();
        let mut builder = GbtTreeBuilder {
            x,
            g: &g,
            by_name: &by_name,
            max_depth: params.max_depth,
            lambda: params.lambda,
            gamma: params.gamma,
            nodes: Vec::new(),
            gain: &mut gain,
        };
        builder.build((0..n as u32).collect(), 0);
        let tree = RegressionTree::from_nodes(builder.nodes);
        for (i, p) in pred.iter_mut().enumerate() {
            *p += params.learning_rate * tree.predict_row(x.row(i));
        }
        trees.push(tree);
        let mse = pred
            .iter()
            .zip(y)
            .map(|(&p, &t)| (p - t) * (p - t))
            .sum::<T>()
            / n_t;
        loss_trace.push(mse);
    }

    Ok(Gbt {
        base,
        learning_rate: params.learning_rate,
        trees,
        feature_names: x.names().to_vec(),
        gain,
        loss_trace,
    })
}

struct GbtTreeBuilder<'a, T: Real> {
    x: &'a FeatureMatrix<T>,
    /// Per-row gradients; the Hessian of squared loss is identically 1, so
    /// Hessian sums are row counts.
    g: &'a [T],
    by_name: &'a [usize],
    max_depth: usize,
    lambda: T,
    gamma: T,
    nodes: Vec<Node<T>>,
    gain: &'a mut [T],
}

struct GbtSplit<T> {
    gain: T,
    feature: usize,
    threshold: T,
}

impl<T: Real> GbtTreeBuilder<'_, T> {
    fn build(&mut self, rows: Vec<u32>, depth: usize) -> u32 {
        let id = self.nodes.len() as u32;
        self.nodes.push(Node::Leaf { value: T::zero() });

        let g_sum: T = rows.iter().map(|&r| self.g[r as usize]).sum();
        let h_sum = T::of_usize(rows.len());
        let leaf_weight = -g_sum / (h_sum + self.lambda);

        let best = if depth < self.max_depth && rows.len() >= 2 {
            self.find_best_split(&rows)
        } else {
            None
        };
        match best {
            None => {
                self.nodes[id as usize] = Node::Leaf { value: leaf_weight };
            }
            Some(best) => {
                let (left_rows, right_rows): (Vec<u32>, Vec<u32>) = rows
                    .into_iter()
                    .partition(|&r| self.x.get(r as usize, best.feature) < best.threshold);
                if left_rows.is_empty() || right_rows.is_empty() {
                    self.nodes[id as usize] = Node::Leaf { value: leaf_weight };
                    return id;
                }
                self.gain[best.feature] += best.gain;
                let left = self.build(left_rows, depth + 1);
                let right = self.build(right_rows, depth + 1);
                self.nodes[id as usize] = Node::Split {
                    feature: best.feature,
                    threshold: best.threshold,
                    left,
                    right,
                };
            }
        }
        id
    }

    /// Scans all features in name order; ties are broken by feature name,
    /// then by lower threshold (strictly-greater gain wins under that order).
    fn find_best_split(&self, rows: &[u32]) -> Option<GbtSplit<T>> {
        let n = rows.len();
        let g_total: T = rows.iter().map(|&r| self.g[r as usize]).sum();
        let h_total = T::of_usize(n);
        let parent = g_total * g_total / (h_total + self.lambda);

        let mut best: Option<GbtSplit<T>> = None;
        let mut pairs: Vec<(T, T)> = Vec::with_capacity(n);
        for &feature in self.by_name {
            pairs.clear();
            pairs.extend(
                rows.iter()
                    .map(|&r| (self.x.get(r as usize, feature), self.g[r as usize])),
            );
            pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite feature values"));

            let mut g_left = T::zero();
            for i in 0..n - 1 {
                g_left += pairs[i].1;
                let (a, b) = (pairs[i].0, pairs[i + 1].0);
                if a == b {
                    continue;
                }
                let h_left = T::of_usize(i + 1);
                let g_right = g_total - g_left;
                let h_right = T::of_usize(n - i - 1);
                let gain = T::half()
                    * (g_left * g_left / (h_left + self.lambda)
                        + g_right * g_right / (h_right + self.lambda)
                        - parent)
                    - self.gamma;
                if gain > T::zero() && best.as_ref().map_or(true, |s| gain > s.gain) {
                    best = Some(GbtSplit {
                        gain,
                        feature,
                        threshold: (a + b) * T::half(),
                    });
                }
            }
        }
        best
    }
}
