//! Multilayer perceptron regressor.
//!
//! ReLU hidden layers, a linear scalar output, full-batch gradient descent
//! with momentum, and optional L2 weight decay (applied to weights, not
//! biases). Two choices make fitted models invariant to feature column
//! reordering: inputs are canonicalized to feature-name-sorted order before
//! any arithmetic, and each first-layer weight column is drawn from an RNG
//! stream keyed by that feature's name.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use tla_core::Real;

use crate::error::{MlError, Result};
use crate::matrix::FeatureMatrix;
use crate::rng::derive_seed;
use crate::tree::{training_column_map, validate_xy};

/// Hyperparameters for the MLP regressor.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MlpParams<T> {
    /// Hidden layer widths, e.g. `[64, 32]`. Must be non-empty.
    pub hidden: Vec<usize>,
    /// Gradient-descent step size.
    pub learning_rate: T,
    /// Number of full-batch epochs. Zero leaves the network at its
    /// initialization.
    pub epochs: usize,
    /// L2 penalty coefficient on weights (biases are never decayed).
    pub weight_decay: T,
    /// Momentum coefficient in [0, 1).
    pub momentum: T,
    /// Master seed for weight initialization.
    pub seed: u64,
}

impl<T: Real> Default for MlpParams<T> {
    fn default() -> Self {
        MlpParams {
            hidden: vec![32],
            learning_rate: T::of(1e-3),
            epochs: 500,
            weight_decay: T::zero(),
            momentum: T::of(0.9),
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct Layer<T> {
    /// Row-major `[n_out × n_in]` weight matrix.
    w: Vec<T>,
    b: Vec<T>,
    n_in: usize,
    n_out: usize,
}

impl<T: Real> Layer<T> {
    fn zeros_like(&self) -> Layer<T> {
        Layer {
            w: vec![T::zero(); self.w.len()],
            b: vec![T::zero(); self.b.len()],
            n_in: self.n_in,
            n_out: self.n_out,
        }
    }
}

/// A fitted MLP regressor.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(bound(
    serialize = "T: Serialize",
    deserialize = "T: serde::de::DeserializeOwned"
))]
pub struct Mlp<T> {
    layers: Vec<Layer<T>>,
    /// Input feature names in the canonical (name-sorted) order the network
    /// consumes them.
    feature_names: Vec<String>,
    loss_trace: Vec<T>,
}

impl<T: Real> Mlp<T> {
    /// Input feature names in canonical order.
    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    /// Full-batch training loss after each epoch (MSE/2 plus the decay term).
    pub fn loss_trace(&self) -> &[T] {
        &self.loss_trace
    }

    /// Predicts targets for `x`, whose columns may be in any order but must
    /// contain every training feature by name.
    pub fn predict(&self, x: &FeatureMatrix<T>) -> Result<Vec<T>> {
        let cols = training_column_map(&self.feature_names, x)?;
        let mut input = vec![T::zero(); self.feature_names.len()];
        let mut out = Vec::with_capacity(x.n_rows());
        let mut scratch = Scratch::for_layers(&self.layers);
        for r in 0..x.n_rows() {
            let row = x.row(r);
            for (v, &c) in input.iter_mut().zip(cols.iter()) {
                *v = row[c];
            }
            out.push(forward(&self.layers, &input, &mut scratch));
        }
        Ok(out)
    }

    /// Sum of squared weights over all layers (biases excluded).
    pub fn weight_norm_sq(&self) -> T {
        self.layers
            .iter()
            .flat_map(|l| l.w.iter())
            .map(|&w| w * w)
            .sum()
    }
}

/// Per-layer pre-activations and activations reused across rows.
struct Scratch<T> {
    /// `z[l]` = pre-activation of layer `l` (length `n_out`).
    z: Vec<Vec<T>>,
    /// `a[l]` = activation entering layer `l`; `a[0]` is unused (the input
    /// row is passed separately), `a[l>0]` = relu(z[l-1]).
    a: Vec<Vec<T>>,
}

impl<T: Real> Scratch<T> {
    fn for_layers(layers: &[Layer<T>]) -> Scratch<T> {
        Scratch {
            z: layers.iter().map(|l| vec![T::zero(); l.n_out]).collect(),
            a: layers.iter().map(|l| vec![T::zero(); l.n_in]).collect(),
        }
    }
}

/// Runs the network on one canonical-order row, filling `scratch` with the
/// intermediate values backprop needs. Returns the scalar output.
fn forward<T: Real>(layers: &[Layer<T>], input: &[T], scratch: &mut Scratch<T>) -> T {
    let n_layers = layers.len();
    for (l, layer) in layers.iter().enumerate() {
        let a_in: &[T] = if l == 0 { input } else { &scratch.a[l] };
        let mut z = std::mem::take(&mut scratch.z[l]);
        for (o, zo) in z.iter_mut().enumerate() {
            let wrow = &layer.w[o * layer.n_in..(o + 1) * layer.n_in];
            let mut s = layer.b[o];
            for (wi, ai) in wrow.iter().zip(a_in.iter()) {
                s += *wi * *ai;
            }
            *zo = s;
        }
        if l + 1 < n_layers {
            // ReLU into the next layer's input buffer.
            for (o, &zo) in z.iter().enumerate() {
                scratch.a[l + 1][o] = if zo > T::zero() { zo } else { T::zero() };
            }
        }
        scratch.z[l] = z;
    }
    scratch.z[n_layers - 1][0]
}

/// Full-batch loss and per-layer gradients at the current parameters.
///
/// Loss = `(1/2n)·Σ (out − y)² + (wd/2)·Σ w²`; gradients match exactly.
fn loss_and_grad<T: Real>(
    layers: &[Layer<T>],
    rows: &[Vec<T>],
    y: &[T],
    weight_decay: T,
) -> (T, Vec<Layer<T>>) {
    let n = rows.len();
    let n_layers = layers.len();
    let mut grads: Vec<Layer<T>> = layers.iter().map(Layer::zeros_like).collect();
    let mut scratch = Scratch::for_layers(layers);
    let mut delta: Vec<Vec<T>> = layers.iter().map(|l| vec![T::zero(); l.n_out]).collect();

    let mut sq_sum = T::zero();
    for (row, &target) in rows.iter().zip(y.iter()) {
        let out = forward(layers, row, &mut scratch);
        let err = out - target;
        sq_sum += err * err;

        // Output layer delta, then walk backwards.
        delta[n_layers - 1][0] = err;
        for l in (0..n_layers).rev() {
            let a_in: &[T] = if l == 0 { row } else { &scratch.a[l] };
            let layer = &layers[l];
            let g = &mut grads[l];
            for o in 0..layer.n_out {
                let d = delta[l][o];
                g.b[o] += d;
                let grow = &mut g.w[o * layer.n_in..(o + 1) * layer.n_in];
                for (gw, ai) in grow.iter_mut().zip(a_in.iter()) {
                    *gw += d * *ai;
                }
            }
            if l > 0 {
                // delta[l-1] = (Wᵀ delta[l]) ⊙ relu'(z[l-1])
                let prev_out = layers[l - 1].n_out;
                for i in 0..prev_out {
                    let mut s = T::zero();
                    for o in 0..layer.n_out {
                        s += layer.w[o * layer.n_in + i] * delta[l][o];
                    }
                    let gate = if scratch.z[l - 1][i] > T::zero() {
                        T::one()
                    } else {
                        T::zero()
                    };
                    delta[l - 1][i] = s * gate;
                }
            }
        }
    }

    let inv_n = T::one() / T::of_usize(n);
    let mut loss = T::half() * sq_sum * inv_n;
    for (g, layer) in grads.iter_mut().zip(layers.iter()) {
        for (gw, &w) in g.w.iter_mut().zip(layer.w.iter()) {
            *gw = *gw * inv_n + weight_decay * w;
            loss += T::half() * weight_decay * w * w;
        }
        for gb in g.b.iter_mut() {
            *gb *= inv_n;
        }
    }
    (loss, grads)
}

/// Initializes the layer stack. The first layer's weight *columns* are drawn
/// per feature name so initialization is independent of column order; later
/// layers use one stream each.
fn init_layers<T: Real>(names: &[String], hidden: &[usize], seed: u64) -> Vec<Layer<T>> {
    let mut widths = Vec::with_capacity(hidden.len() + 2);
    widths.push(names.len());
    widths.extend_from_slice(hidden);
    widths.push(1);

    let mut layers = Vec::with_capacity(widths.len() - 1);
    for l in 0..widths.len() - 1 {
        let (n_in, n_out) = (widths[l], widths[l + 1]);
        let bound = T::of(1.0 / (n_in as f64).sqrt());
        let mut w = vec![T::zero(); n_out * n_in];
        if l == 0 {
            for (j, name) in names.iter().enumerate() {
                let mut rng =
                    ChaCha8Rng::seed_from_u64(derive_seed(seed, &[b"input", name.as_bytes()]));
                for o in 0..n_out {
                    let u: f64 = rng.gen();
                    w[o * n_in + j] = T::of(2.0 * u - 1.0) * bound;
                }
            }
        } else {
            let mut rng =
                ChaCha8Rng::seed_from_u64(derive_seed(seed, &[b"layer", &(l as u64).to_le_bytes()]));
            for wv in w.iter_mut() {
                let u: f64 = rng.gen();
                *wv = T::of(2.0 * u - 1.0) * bound;
            }
        }
        layers.push(Layer {
            w,
            b: vec![T::zero(); n_out],
            n_in,
            n_out,
        });
    }
    layers
}

/// Fits an MLP regressor with full-batch gradient descent plus momentum.
pub fn fit_mlp<T: Real>(x: &FeatureMatrix<T>, y: &[T], params: &MlpParams<T>) -> Result<Mlp<T>> {
    validate_xy(x, y)?;
    if params.hidden.is_empty() || params.hidden.iter().any(|&h| h == 0) {
        return Err(MlError::InvalidParam(
            "hidden layer widths must be non-empty and positive".into(),
        ));
    }
    if !(params.learning_rate > T::zero() && params.learning_rate.is_finite()) {
        return Err(MlError::InvalidParam(format!(
            "learning_rate must be positive, got {}",
            params.learning_rate
        )));
    }
    if !(params.weight_decay >= T::zero()) {
        return Err(MlError::InvalidParam(format!(
            "weight_decay must be non-negative, got {}",
            params.weight_decay
        )));
    }
    if !(params.momentum >= T::zero() && params.momentum < T::one()) {
        return Err(MlError::InvalidParam(format!(
            "momentum must be in [0, 1), got {}",
            params.momentum
        )));
    }

    // Canonicalize: all arithmetic happens in name-sorted column order, so
    // two layouts of the same data run bit-identical training.
    let mut names = x.names().to_vec();
    names.sort();
    let canon = x.select_columns(&names)?;
    let rows: Vec<Vec<T>> = (0..canon.n_rows()).map(|r| canon.row(r).to_vec()).collect();

    let mut layers = init_layers::<T>(&names, &params.hidden, params.seed);
    let mut velocity: Vec<Layer<T>> = layers.iter().map(Layer::zeros_like).collect();
    let mut loss_trace = Vec::with_capacity(params.epochs);

    for epoch in 0..params.epochs {
        let (loss, grads) = loss_and_grad(&layers, &rows, y, params.weight_decay);
        if !loss.is_finite() {
            return Err(MlError::Diverged(format!(
                "loss became non-finite at epoch {epoch}; lower the learning rate"
            )));
        }
        for ((layer, v), g) in layers.iter_mut().zip(&mut velocity).zip(&grads) {
            for ((w, vw), &gw) in layer.w.iter_mut().zip(&mut v.w).zip(&g.w) {
                *vw = params.momentum * *vw - params.learning_rate * gw;
                *w += *vw;
            }
            for ((b, vb), &gb) in layer.b.iter_mut().zip(&mut v.b).zip(&g.b) {
                *vb = params.momentum * *vb - params.learning_rate * gb;
                *b += *vb;
            }
        }
        loss_trace.push(loss);
    }
    // Final check: the last update may itself have blown up.
    let (final_loss, _) = loss_and_grad(&layers, &rows, y, params.weight_decay);
    if !final_loss.is_finite() {
        return Err(MlError::Diverged(format!(
            "loss became non-finite at epoch {}; lower the learning rate",
            params.epochs
        )));
    }

    Ok(Mlp {
        layers,
        feature_names: names,
        loss_trace,
    })
}
