//! CART regression trees and random forests.
//!
//! Trees split on variance reduction (sum-of-squared-error decrease), with
//! candidate thresholds at midpoints between distinct consecutive sorted
//! values. Per-node candidate feature subsets are chosen by hashing feature
//! *names* (not column positions), and split ties are resolved by feature
//! name, so fitted forests — and therefore predictions — are invariant to
//! feature column reordering for a fixed seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use tla_core::Real;

use crate::error::{MlError, Result};
use crate::matrix::FeatureMatrix;
use crate::rng::derive_seed;

/// Hyperparameters for a random forest regressor.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RfParams<T> {
    /// Number of trees in the ensemble.
    pub n_trees: usize,
    /// Maximum split depth; the root is at depth 0, so `max_depth = 0`
    /// yields single-leaf trees.
    pub max_depth: usize,
    /// Minimum number of training rows required in each child of a split.
    pub min_leaf: usize,
    /// Fraction of features considered at each node, in (0, 1]. The number
    /// of candidates is `ceil(feature_frac * n_features)`, at least 1.
    pub feature_frac: T,
    /// Whether each tree is fit on a bootstrap resample of the rows.
    pub bootstrap: bool,
    /// Master seed; per-tree streams are derived from it.
    pub seed: u64,
}

impl<T: Real> Default for RfParams<T> {
    fn default() -> Self {
        RfParams {
            n_trees: 100,
            max_depth: 7,
            min_leaf: 2,
            feature_frac: T::of(1.0 / 3.0),
            bootstrap: true,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub(crate) enum Node<T> {
    Leaf {
        value: T,
    },
    Split {
        /// Column index in the *training* feature order.
        feature: usize,
        threshold: T,
        left: u32,
        right: u32,
    },
}

/// A single fitted regression tree (arena-allocated, root at index 0).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RegressionTree<T> {
    nodes: Vec<Node<T>>,
}

impl<T: Real> RegressionTree<T> {
    pub(crate) fn from_nodes(nodes: Vec<Node<T>>) -> Self {
        RegressionTree { nodes }
    }

    /// Predicts one row given features in training column order.
    pub fn predict_row(&self, row: &[T]) -> T {
        let mut at = 0usize;
        loop {
            match &self.nodes[at] {
                Node::Leaf { value } => return *value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    at = if row[*feature] < *threshold {
                        *left as usize
                    } else {
                        *right as usize
                    };
                }
            }
        }
    }

    /// Number of nodes (splits + leaves).
    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }
}

/// A fitted random forest regressor.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(bound(
    serialize = "T: Serialize",
    deserialize = "T: serde::de::DeserializeOwned"
))]
pub struct RandomForest<T> {
    trees: Vec<RegressionTree<T>>,
    feature_names: Vec<String>,
    /// Total SSE reduction attributed to each feature, parallel to
    /// `feature_names`, summed over all splits of all trees.
    importance: Vec<T>,
    /// Out-of-bag row indices per tree, recorded at fit time when bootstrap
    /// sampling is on. Training-time metadata only: not serialized.
    #[serde(skip)]
    oob_rows: Vec<Vec<u32>>,
}

impl<T: Real> RandomForest<T> {
    /// Feature names in training column order.
    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    /// Number of trees.
    pub fn n_trees(&self) -> usize {
        self.trees.len()
    }

    /// Raw per-feature importance: total SSE reduction from all splits on
    /// that feature across the ensemble.
    pub fn importance(&self) -> Vec<(String, T)> {
        self.feature_names
            .iter()
            .cloned()
            .zip(self.importance.iter().copied())
            .collect()
    }

    /// Predicts targets for `x`, whose columns may be in any order but must
    /// contain every training feature by name.
    pub fn predict(&self, x: &FeatureMatrix<T>) -> Result<Vec<T>> {
        let cols = training_column_map(&self.feature_names, x)?;
        let mut buf = vec![T::zero(); self.feature_names.len()];
        let inv_n = T::one() / T::of_usize(self.trees.len());
        Ok((0..x.n_rows())
            .map(|r| {
                let row = x.row(r);
                for (b, &c) in buf.iter_mut().zip(cols.iter()) {
                    *b = row[c];
                }
                let mut s = T::zero();
                for t in &self.trees {
                    s += t.predict_row(&buf);
                }
                s * inv_n
            })
            .collect())
    }

    /// Out-of-bag permutation importance as per-feature Z-scores.
    ///
    /// For each tree, the increase in OOB mean squared error caused by
    /// permuting one feature's values among the OOB rows is recorded; the
    /// Z-score is the mean of those increases over trees divided by their
    /// standard deviation. In-bag luck does not transfer out of bag, so a
    /// pure-noise feature scores near zero no matter how well the trees
    /// happened to exploit it in-sample.
    ///
    /// `x`/`y` must be the training data; only available on freshly fitted
    /// forests with bootstrap sampling (OOB rows are not serialized).
    pub fn oob_importance(
        &self,
        x: &FeatureMatrix<T>,
        y: &[T],
        seed: u64,
    ) -> Result<Vec<(String, T)>> {
        validate_xy(x, y)?;
        let cols = training_column_map(&self.feature_names, x)?;
        if self.oob_rows.iter().all(|r| r.is_empty()) {
            return Err(MlError::InsufficientData(
                "no out-of-bag rows recorded; fit with bootstrap sampling".into(),
            ));
        }
        let p = self.feature_names.len();
        // Per-feature lists of per-tree MSE increases.
        let mut increases: Vec<Vec<T>> = vec![Vec::with_capacity(self.trees.len()); p];
        let mut buf = vec![T::zero(); p];

        for (t, (tree, oob)) in self.trees.iter().zip(&self.oob_rows).enumerate() {
            if oob.is_empty() {
                continue;
            }
            let m = T::of_usize(oob.len());
            let mut base = T::zero();
            for &r in oob {
                let row = x.row(r as usize);
                for (b, &c) in buf.iter_mut().zip(cols.iter()) {
                    *b = row[c];
                }
                let e = tree.predict_row(&buf) - y[r as usize];
                base += e * e;
            }
            base = base / m;

            for (j, name) in self.feature_names.iter().enumerate() {
                let mut perm: Vec<T> = oob
                    .iter()
                    .map(|&r| x.get(r as usize, cols[j]))
                    .collect();
                let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(
                    seed,
                    &[b"oob", &(t as u64).to_le_bytes(), name.as_bytes()],
                ));
                permute(&mut perm, &mut rng);
                let mut mse = T::zero();
                for (k, &r) in oob.iter().enumerate() {
                    let row = x.row(r as usize);
                    for (b, &c) in buf.iter_mut().zip(cols.iter()) {
                        *b = row[c];
                    }
                    buf[j] = perm[k];
                    let e = tree.predict_row(&buf) - y[r as usize];
                    mse += e * e;
                }
                increases[j].push(mse / m - base);
            }
        }

        Ok(self
            .feature_names
            .iter()
            .cloned()
            .zip(increases.iter().map(|d| z_score(d)))
            .collect())
    }
}

/// Fisher–Yates shuffle (rand's `shuffle` works too; written out so the swap
/// sequence is pinned by this crate, not a dependency's internals).
fn permute<T, R: Rng>(values: &mut [T], rng: &mut R) {
    for i in (1..values.len()).rev() {
        let j = rng.gen_range(0..=i);
        values.swap(i, j);
    }
}

/// Mean over sd (population); zero when there is no variation to scale by.
fn z_score<T: Real>(samples: &[T]) -> T {
    if samples.is_empty() {
        return T::zero();
    }
    let n = T::of_usize(samples.len());
    let mean = samples.iter().copied().sum::<T>() / n;
    let var = samples.iter().map(|&d| (d - mean) * (d - mean)).sum::<T>() / n;
    let sd = var.sqrt();
    if sd > T::zero() {
        mean / sd
    } else {
        T::zero()
    }
}

/// Maps training feature names to column indices of `x`.
pub(crate) fn training_column_map<T: Real>(
    names: &[String],
    x: &FeatureMatrix<T>,
) -> Result<Vec<usize>> {
    names
        .iter()
        .map(|n| {
            x.col_index(n).ok_or_else(|| {
                MlError::InvalidParam(format!("prediction matrix is missing feature '{n}'"))
            })
        })
        .collect()
}

/// Fits a random forest regressor.
pub fn fit_forest<T: Real>(
    x: &FeatureMatrix<T>,
    y: &[T],
    params: &RfParams<T>,
) -> Result<RandomForest<T>> {
    validate_xy(x, y)?;
    if params.n_trees == 0 {
        return Err(MlError::InvalidParam("n_trees must be at least 1".into()));
    }
    if params.min_leaf == 0 {
        return Err(MlError::InvalidParam("min_leaf must be at least 1".into()));
    }
    if !(params.feature_frac > T::zero() && params.feature_frac <= T::one()) {
        return Err(MlError::InvalidParam(format!(
            "feature_frac must be in (0, 1], got {}",
            params.feature_frac
        )));
    }

    let n = x.n_rows();
    let mut importance = vec![T::zero(); x.n_cols()];
    let mut trees = Vec::with_capacity(params.n_trees);
    let mut oob_rows = Vec::with_capacity(params.n_trees);
    for t in 0..params.n_trees {
        let tree_seed = derive_seed(params.seed, &[b"tree", &(t as u64).to_le_bytes()]);
        let rows: Vec<u32> = if params.bootstrap {
            let mut rng = ChaCha8Rng::seed_from_u64(tree_seed);
            let drawn: Vec<u32> = (0..n).map(|_| rng.gen_range(0..n) as u32).collect();
            let mut in_bag = vec![false; n];
            for &r in &drawn {
                in_bag[r as usize] = true;
            }
            oob_rows.push(
                (0..n as u32)
                    .filter(|&r| !in_bag[r as usize])
                    .collect::<Vec<u32>>(),
            );
            drawn
        } else {
            oob_rows.push(Vec::new());
            (0..n as u32).collect()
        };
        let mut builder = TreeBuilder {
            x,
            y,
            by_name: name_order(x.names()),
            max_depth: params.max_depth,
            min_leaf: params.min_leaf,
            k_features: n_candidates(params.feature_frac, x.n_cols()),
            tree_seed,
            nodes: Vec::new(),
            importance: &mut importance,
        };
        builder.build(rows, 0);
        trees.push(RegressionTree {
            nodes: builder.nodes,
        });
    }
    Ok(RandomForest {
        trees,
        feature_names: x.names().to_vec(),
        importance,
        oob_rows,
    })
}

pub(crate) fn validate_xy<T: Real>(x: &FeatureMatrix<T>, y: &[T]) -> Result<()> {
    if x.n_rows() != y.len() {
        return Err(MlError::LengthMismatch(format!(
            "x has {} rows but y has {} values",
            x.n_rows(),
            y.len()
        )));
    }
    if y.is_empty() {
        return Err(MlError::InsufficientData(
            "need at least one training row".into(),
        ));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(MlError::BadMatrix(
            "target contains a non-finite value".into(),
        ));
    }
    Ok(())
}

/// Column indices sorted by feature name (the deterministic iteration order).
pub(crate) fn name_order(names: &[String]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..names.len()).collect();
    order.sort_by(|&a, &b| names[a].cmp(&names[b]));
    order
}

fn n_candidates<T: Real>(frac: T, p: usize) -> usize {
    let k = (frac.as_f64() * p as f64).ceil() as usize;
    k.clamp(1, p)
}

struct TreeBuilder<'a, T: Real> {
    x: &'a FeatureMatrix<T>,
    y: &'a [T],
    /// Column indices sorted by feature name.
    by_name: Vec<usize>,
    max_depth: usize,
    min_leaf: usize,
    k_features: usize,
    tree_seed: u64,
    nodes: Vec<Node<T>>,
    importance: &'a mut [T],
}

struct BestSplit<T> {
    gain: T,
    feature: usize,
    threshold: T,
}

impl<T: Real> TreeBuilder<'_, T> {
    /// Builds the subtree for `rows`, returning its arena index.
    fn build(&mut self, rows: Vec<u32>, depth: usize) -> u32 {
        let id = self.nodes.len() as u32;
        self.nodes.push(Node::Leaf { value: T::zero() }); // placeholder

        let n = rows.len();
        let sum: T = rows.iter().map(|&r| self.y[r as usize]).sum();
        let mean = sum / T::of_usize(n);

        let splittable = depth < self.max_depth && n >= 2 * self.min_leaf;
        let best = if splittable {
            self.find_best_split(&rows, id)
        } else {
            None
        };

        match best {
            None => {
                self.nodes[id as usize] = Node::Leaf { value: mean };
            }
            Some(best) => {
                let (left_rows, right_rows): (Vec<u32>, Vec<u32>) = rows
                    .into_iter()
                    .partition(|&r| self.x.get(r as usize, best.feature) < best.threshold);
                // The threshold lies strictly between two distinct values for
                // every row set we scored, so both sides are non-empty; guard
                // anyway so a degenerate midpoint can never recurse forever.
                if left_rows.is_empty() || right_rows.is_empty() {
                    self.nodes[id as usize] = Node::Leaf { value: mean };
                    return id;
                }
                self.importance[best.feature] += best.gain;
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

    /// Chooses the candidate feature columns for one node: the `k` smallest
    /// by hash of (tree seed, node id, feature name), iterated in name order.
    fn candidate_features(&self, node_id: u32) -> Vec<usize> {
        if self.k_features >= self.by_name.len() {
            return self.by_name.clone();
        }
        let mut keyed: Vec<(u64, usize)> = self
            .by_name
            .iter()
            .map(|&c| {
                let h = derive_seed(
                    self.tree_seed,
                    &[b"node", &node_id.to_le_bytes(), self.x.names()[c].as_bytes()],
                );
                (h, c)
            })
            .collect();
        // Tie-break equal hashes by name so selection is fully deterministic.
        keyed.sort_by(|a, b| {
            a.0.cmp(&b.0)
                .then_with(|| self.x.names()[a.1].cmp(&self.x.names()[b.1]))
        });
        let mut chosen: Vec<usize> = keyed[..self.k_features].iter().map(|&(_, c)| c).collect();
        chosen.sort_by(|&a, &b| self.x.names()[a].cmp(&self.x.names()[b]));
        chosen
    }

    /// Finds the best (feature, threshold) by SSE reduction. Ties are broken
    /// by feature name, then by lower threshold; since candidates are scanned
    /// in name order and thresholds ascending, "strictly greater gain wins"
    /// implements both rules.
    fn find_best_split(&self, rows: &[u32], node_id: u32) -> Option<BestSplit<T>> {
        let n = rows.len();
        let n_t = T::of_usize(n);
        let total: T = rows.iter().map(|&r| self.y[r as usize]).sum();
        let parent_score = total * total / n_t;

        let mut best: Option<BestSplit<T>> = None;
        let mut pairs: Vec<(T, T)> = Vec::with_capacity(n);
        for &feature in &self.candidate_features(node_id) {
            pairs.clear();
            pairs.extend(
                rows.iter()
                    .map(|&r| (self.x.get(r as usize, feature), self.y[r as usize])),
            );
            pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite feature values"));

            let mut left_sum = T::zero();
            for i in 0..n - 1 {
                left_sum += pairs[i].1;
                let n_left = i + 1;
                if n_left < self.min_leaf || n - n_left < self.min_leaf {
                    continue;
                }
                let (a, b) = (pairs[i].0, pairs[i + 1].0);
                if a == b {
                    continue; // can only cut between distinct values
                }
                let right_sum = total - left_sum;
                let score = left_sum * left_sum / T::of_usize(n_left)
                    + right_sum * right_sum / T::of_usize(n - n_left);
                let gain = score - parent_score;
                if gain > T::zero() && best.as_ref().map_or(true, |s| gain > s.gain) {
                    best = Some(BestSplit {
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

#[cfg(test)]
mod tests {
    use super::*;

    /// Deterministic integer-valued dataset; integer sums are exact in f64,
    /// so gain comparisons are bit-identical across implementations.
    fn int_dataset(n: usize, p: usize, seed: u64) -> (FeatureMatrix<f64>, Vec<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let names: Vec<String> = (0..p).map(|j| format!("f{j}")).collect();
        let data: Vec<f64> = (0..n * p).map(|_| rng.gen_range(0..12) as f64).collect();
        let y: Vec<f64> = (0..n).map(|_| rng.gen_range(-10..=10) as f64).collect();
        (FeatureMatrix::new(names, data, n).unwrap(), y)
    }

    fn deep_params(frac: f64) -> RfParams<f64> {
        RfParams {
            n_trees: 1,
            max_depth: 64,
            min_leaf: 1,
            feature_frac: frac,
            bootstrap: false,
            seed: 7,
        }
    }

    // ------------------------------------------------------------------
    // Independent oracle: exhaustive CART with naive SSE evaluation. Same
    // split definition and tie rules, but no sorting/prefix machinery — every
    // candidate is scored by looping over all rows.
    // ------------------------------------------------------------------
    fn oracle_predict(
        x: &FeatureMatrix<f64>,
        y: &[f64],
        rows: &[usize],
        probe: &[f64],
        depth: usize,
        max_depth: usize,
        min_leaf: usize,
    ) -> f64 {
        let n = rows.len();
        let mean = rows.iter().map(|&r| y[r]).sum::<f64>() / n as f64;
        if depth >= max_depth || n < 2 * min_leaf {
            return mean;
        }
        // Candidate thresholds: midpoints between distinct consecutive sorted
        // values of each feature, scanned in feature-name order.
        let mut name_cols: Vec<usize> = (0..x.n_cols()).collect();
        name_cols.sort_by(|&a, &b| x.names()[a].cmp(&x.names()[b]));

        let parent_score = {
            let s: f64 = rows.iter().map(|&r| y[r]).sum();
            s * s / n as f64
        };
        let mut best: Option<(f64, usize, f64)> = None; // (gain, feature, threshold)
        for &f in &name_cols {
            let mut vals: Vec<f64> = rows.iter().map(|&r| x.get(r, f)).collect();
            vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
            vals.dedup();
            for w in vals.windows(2) {
                let thr = (w[0] + w[1]) / 2.0;
                let left: Vec<usize> = rows.iter().copied().filter(|&r| x.get(r, f) < thr).collect();
                let n_l = left.len();
                let n_r = n - n_l;
                if n_l < min_leaf || n_r < min_leaf {
                    continue;
                }
                let s_l: f64 = left.iter().map(|&r| y[r]).sum();
                let s_r: f64 = rows
                    .iter()
                    .filter(|&&r| x.get(r, f) >= thr)
                    .map(|&r| y[r])
                    .sum();
                let gain = s_l * s_l / n_l as f64 + s_r * s_r / n_r as f64 - parent_score;
                if gain > 0.0 && best.map_or(true, |(g, _, _)| gain > g) {
                    best = Some((gain, f, thr));
                }
            }
        }
        match best {
            None => mean,
            Some((_, f, thr)) => {
                let (l, r): (Vec<usize>, Vec<usize>) =
                    rows.iter().partition(|&&row| x.get(row, f) < thr);
                if l.is_empty() || r.is_empty() {
                    return mean;
                }
                let side = if probe[f] < thr { l } else { r };
                oracle_predict(x, y, &side, probe, depth + 1, max_depth, min_leaf)
            }
        }
    }

    #[test]
    fn constant_target_predicts_the_constant() {
        let (x, _) = int_dataset(40, 3, 1);
        let y = vec![4.25; 40];
        let params = RfParams {
            n_trees: 25,
            ..RfParams::default()
        };
        let rf = fit_forest(&x, &y, &params).unwrap();
        for p in rf.predict(&x).unwrap() {
            assert_eq!(p, 4.25);
        }
        // No split can reduce SSE below zero, so nothing gains importance.
        for (_, imp) in rf.importance() {
            assert_eq!(imp, 0.0);
        }
    }

    #[test]
    fn deep_single_tree_interpolates_distinct_rows() {
        // One column is the row index, so all rows are distinct and a deep
        // tree must isolate every row: training predictions reproduce y.
        let n = 40;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut data: Vec<f64> = Vec::new();
        for i in 0..n {
            data.push(i as f64);
            data.push(rng.gen_range(0..5) as f64);
        }
        let x = FeatureMatrix::new(vec!["idx".into(), "junk".into()], data, n).unwrap();
        let y: Vec<f64> = (0..n).map(|_| rng.gen_range(-50..=50) as f64).collect();
        let rf = fit_forest(&x, &y, &deep_params(1.0)).unwrap();
        assert_eq!(rf.predict(&x).unwrap(), y);
    }

    #[test]
    fn matches_exhaustive_cart_oracle() {
        // Depth-limited trees on small integer data: compare against the
        // naive exhaustive CART on both training rows and unseen probes.
        for seed in [11, 12, 13] {
            let (x, y) = int_dataset(30, 3, seed);
            let params = RfParams {
                n_trees: 1,
                max_depth: 3,
                min_leaf: 2,
                feature_frac: 1.0,
                bootstrap: false,
                seed: 0,
            };
            let rf = fit_forest(&x, &y, &params).unwrap();
            let rows: Vec<usize> = (0..30).collect();

            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xabc);
            let mut probes: Vec<Vec<f64>> = (0..30).map(|r| x.row(r).to_vec()).collect();
            for _ in 0..40 {
                probes.push((0..3).map(|_| rng.gen_range(0..24) as f64 / 2.0).collect());
            }
            for probe in &probes {
                let pm = FeatureMatrix::new(x.names().to_vec(), probe.clone(), 1).unwrap();
                let got = rf.predict(&pm).unwrap()[0];
                let want = oracle_predict(&x, &y, &rows, probe, 0, 3, 2);
                assert_eq!(got, want, "probe {probe:?} (seed {seed})");
            }
        }
    }

    #[test]
    fn refitting_is_deterministic() {
        let (x, y) = int_dataset(60, 4, 21);
        let params = RfParams {
            n_trees: 12,
            feature_frac: 0.5,
            ..RfParams::default()
        };
        let a = fit_forest(&x, &y, &params).unwrap();
        let b = fit_forest(&x, &y, &params).unwrap();
        assert_eq!(a.predict(&x).unwrap(), b.predict(&x).unwrap());
        assert_eq!(format!("{:?}", a.importance()), format!("{:?}", b.importance()));
    }

    #[test]
    fn row_permutation_does_not_change_a_deterministic_tree() {
        let (x, y) = int_dataset(50, 3, 31);
        let rf = fit_forest(&x, &y, &deep_params(1.0)).unwrap();
        let base = rf.predict(&x).unwrap();

        // Reverse the row order and refit.
        let perm: Vec<usize> = (0..50).rev().collect();
        let xp = x.select_rows(&perm).unwrap();
        let yp: Vec<f64> = perm.iter().map(|&r| y[r]).collect();
        let rfp = fit_forest(&xp, &yp, &deep_params(1.0)).unwrap();
        let got = rfp.predict(&x).unwrap();
        assert_eq!(base, got);
    }

    #[test]
    fn column_reordering_does_not_change_predictions() {
        let (x, y) = int_dataset(60, 5, 41);
        let params = RfParams {
            n_trees: 10,
            max_depth: 6,
            min_leaf: 2,
            feature_frac: 0.5, // exercises the name-keyed feature subsets
            bootstrap: true,
            seed: 9,
        };
        let rf = fit_forest(&x, &y, &params).unwrap();
        let base = rf.predict(&x).unwrap();

        let mut rev: Vec<String> = x.names().to_vec();
        rev.reverse();
        let xr = x.select_columns(&rev).unwrap();
        let rfr = fit_forest(&xr, &y, &params).unwrap();
        // Fit on reordered columns, predict on the original layout.
        assert_eq!(rfr.predict(&x).unwrap(), base);
        // And the original fit predicts identically on a reordered matrix.
        assert_eq!(rf.predict(&xr).unwrap(), base);
    }

    #[test]
    fn importance_is_zero_for_unused_features() {
        // y is a monotone function of f0 alone. With every feature available
        // at every node and no leaf-size constraint, the optimal 2-partition
        // of any node is an interval in sorted-y (= sorted-f0) order, which
        // an f0 threshold always realizes — so no f1 split can strictly win,
        // and ties go to the smaller feature name ("f0").
        let n = 80;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut data = Vec::new();
        let mut y = Vec::new();
        for _ in 0..n {
            let a = rng.gen_range(0..100) as f64;
            let b = rng.gen_range(0..100) as f64;
            data.push(a);
            data.push(b);
            y.push(3.0 * a);
        }
        let x = FeatureMatrix::new(vec!["f0".into(), "f1".into()], data, n).unwrap();
        let params = RfParams {
            n_trees: 5,
            max_depth: 4,
            min_leaf: 1,
            feature_frac: 1.0,
            bootstrap: true,
            seed: 2,
        };
        let rf = fit_forest(&x, &y, &params).unwrap();
        let imp = rf.importance();
        let f0 = imp.iter().find(|(n, _)| n == "f0").unwrap().1;
        let f1 = imp.iter().find(|(n, _)| n == "f1").unwrap().1;
        assert!(f0 > 0.0);
        assert_eq!(f1, 0.0);
    }

    #[test]
    fn every_leaf_satisfies_min_leaf() {
        let (x, y) = int_dataset(70, 3, 51);
        let params = RfParams {
            n_trees: 1,
            max_depth: 32,
            min_leaf: 5,
            feature_frac: 1.0,
            bootstrap: false,
            seed: 0,
        };
        let rf = fit_forest(&x, &y, &params).unwrap();
        let tree = &rf.trees[0];
        // Route every training row to its leaf and count occupancy.
        let mut counts = vec![0usize; tree.nodes.len()];
        for r in 0..x.n_rows() {
            let row = x.row(r);
            let mut at = 0usize;
            loop {
                match &tree.nodes[at] {
                    Node::Leaf { .. } => {
                        counts[at] += 1;
                        break;
                    }
                    Node::Split {
                        feature,
                        threshold,
                        left,
                        right,
                    } => {
                        at = if row[*feature] < *threshold {
                            *left as usize
                        } else {
                            *right as usize
                        };
                    }
                }
            }
        }
        let mut n_leaves = 0;
        for (i, node) in tree.nodes.iter().enumerate() {
            if matches!(node, Node::Leaf { .. }) {
                n_leaves += 1;
                assert!(counts[i] >= 5, "leaf {i} holds {} rows", counts[i]);
            }
        }
        assert!(n_leaves > 1, "tree should have split at least once");
    }

    #[test]
    fn forest_averaging_smooths_between_trees() {
        // With bootstrap on, the ensemble mean over trees must lie within the
        // per-tree prediction envelope.
        let (x, y) = int_dataset(50, 3, 61);
        let params = RfParams {
            n_trees: 15,
            ..RfParams::default()
        };
        let rf = fit_forest(&x, &y, &params).unwrap();
        let preds = rf.predict(&x).unwrap();
        for r in 0..x.n_rows() {
            let row = x.row(r);
            let votes: Vec<f64> = rf.trees.iter().map(|t| t.predict_row(row)).collect();
            let lo = votes.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = votes.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            assert!(preds[r] >= lo - 1e-12 && preds[r] <= hi + 1e-12);
        }
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        let (x, y) = int_dataset(20, 2, 71);
        let bad = [
            RfParams {
                n_trees: 0,
                ..RfParams::default()
            },
            RfParams {
                min_leaf: 0,
                ..RfParams::default()
            },
            RfParams {
                feature_frac: 0.0,
                ..RfParams::default()
            },
            RfParams {
                feature_frac: 1.5,
                ..RfParams::default()
            },
        ];
        for p in bad {
            assert!(fit_forest(&x, &y, &p).is_err());
        }
        assert!(fit_forest(&x, &y[..10], &RfParams::default()).is_err());
        let yn = {
            let mut v = y.clone();
            v[3] = f64::NAN;
            v
        };
        assert!(fit_forest(&x, &yn, &RfParams::default()).is_err());
    }

    #[test]
    fn predict_requires_all_training_features() {
        let (x, y) = int_dataset(20, 3, 81);
        let rf = fit_forest(&x, &y, &RfParams::default()).unwrap();
        let partial = x.select_columns(&["f0".into(), "f1".into()]).unwrap();
        assert!(rf.predict(&partial).is_err());
    }

    #[test]
    fn serde_round_trip_preserves_predictions() {
        let (x, y) = int_dataset(30, 3, 91);
        let rf = fit_forest(&x, &y, &RfParams::default()).unwrap();
        let json = serde_json::to_string(&rf).unwrap();
        let back: RandomForest<f64> = serde_json::from_str(&json).unwrap();
        assert_eq!(rf.predict(&x).unwrap(), back.predict(&x).unwrap());
    }
}
