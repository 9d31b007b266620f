//! Unified model layer: one spec type covering all seven regressors, the
//! declared hyperparameter search spaces, sampling for random search, and a
//! serializable trained-model wrapper that dispatches prediction.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{MlError, Result};
use crate::gbt::{fit_gbt, Gbt, GbtParams};
use crate::linear::{fit_enr, fit_lasso, fit_mlr, fit_ridge, LinearModel};
use crate::matrix::FeatureMatrix;
use crate::mlp::{fit_mlp, Mlp, MlpParams};
use tla_core::Real;
use crate::tree::{fit_forest, RandomForest, RfParams};

/// The seven regression model families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ModelKind {
    #[serde(rename = "MLR")]
    Mlr,
    Ridge,
    Lasso,
    #[serde(rename = "ENR")]
    Enr,
    #[serde(rename = "RF")]
    Rf,
    #[serde(rename = "GBT")]
    Gbt,
    #[serde(rename = "MLP")]
    Mlp,
}

impl ModelKind {
    pub const ALL: [ModelKind; 7] = [
        ModelKind::Mlr,
        ModelKind::Ridge,
        ModelKind::Lasso,
        ModelKind::Enr,
        ModelKind::Rf,
        ModelKind::Gbt,
        ModelKind::Mlp,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ModelKind::Mlr => "MLR",
            ModelKind::Ridge => "Ridge",
            ModelKind::Lasso => "Lasso",
            ModelKind::Enr => "ENR",
            ModelKind::Rf => "RF",
            ModelKind::Gbt => "GBT",
            ModelKind::Mlp => "MLP",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = MlError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mlr" => Ok(ModelKind::Mlr),
            "ridge" => Ok(ModelKind::Ridge),
            "lasso" => Ok(ModelKind::Lasso),
            "enr" => Ok(ModelKind::Enr),
            "rf" => Ok(ModelKind::Rf),
            "gbt" => Ok(ModelKind::Gbt),
            "mlp" => Ok(ModelKind::Mlp),
            other => Err(MlError::InvalidParam(format!(
                "unknown model kind '{other}' (expected one of MLR, Ridge, Lasso, ENR, RF, GBT, MLP)"
            ))),
        }
    }
}

/// A single hyperparameter value. Untagged so JSON stays plain:
/// `0.5`, `300`, or `[64, 32]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum HyperValue {
    Int(u64),
    Float(f64),
    IntList(Vec<u64>),
}

impl HyperValue {
    /// Numeric view; integers widen to floats.
    pub fn as_float(&self) -> Option<f64> {
        match self {
            HyperValue::Float(v) => Some(*v),
            HyperValue::Int(v) => Some(*v as f64),
            HyperValue::IntList(_) => None,
        }
    }

    pub fn as_int(&self) -> Option<u64> {
        match self {
            HyperValue::Int(v) => Some(*v),
            _ => None,
        }
    }

    /// List view; a bare integer reads as a one-element list.
    pub fn as_int_list(&self) -> Option<Vec<u64>> {
        match self {
            HyperValue::IntList(v) => Some(v.clone()),
            HyperValue::Int(v) => Some(vec![*v]),
            HyperValue::Float(_) => None,
        }
    }
}

/// A model family plus concrete hyperparameters. Values must lie within the
/// bounds declared by [`search_space`]; missing entries take the documented
/// defaults at fit time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub kind: ModelKind,
    #[serde(default)]
    pub params: BTreeMap<String, HyperValue>,
}

impl ModelSpec {
    pub fn new(kind: ModelKind) -> Self {
        ModelSpec {
            kind,
            params: BTreeMap::new(),
        }
    }

    pub fn with(mut self, name: &str, value: HyperValue) -> Self {
        self.params.insert(name.to_string(), value);
        self
    }

    fn float(&self, name: &str, default: f64) -> Result<f64> {
        match self.params.get(name) {
            None => Ok(default),
            Some(v) => v.as_float().ok_or_else(|| {
                MlError::InvalidParam(format!("hyperparameter '{name}' must be numeric"))
            }),
        }
    }

    fn int(&self, name: &str, default: u64) -> Result<u64> {
        match self.params.get(name) {
            None => Ok(default),
            Some(v) => v.as_int().ok_or_else(|| {
                MlError::InvalidParam(format!("hyperparameter '{name}' must be an integer"))
            }),
        }
    }

    fn int_list(&self, name: &str, default: &[u64]) -> Result<Vec<u64>> {
        match self.params.get(name) {
            None => Ok(default.to_vec()),
            Some(v) => v.as_int_list().ok_or_else(|| {
                MlError::InvalidParam(format!("hyperparameter '{name}' must be an integer list"))
            }),
        }
    }
}

/// One dimension of a hyperparameter search space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "dist", rename_all = "snake_case")]
pub enum ParamSpace {
    /// log(value) uniform over [log lo, log hi].
    LogUniform { name: String, lo: f64, hi: f64 },
    /// Uniform over [lo, hi].
    Uniform { name: String, lo: f64, hi: f64 },
    /// Uniform over the inclusive integer range [lo, hi].
    IntRange { name: String, lo: u64, hi: u64 },
    /// Uniform over an explicit option list.
    Choice {
        name: String,
        options: Vec<HyperValue>,
    },
}

impl ParamSpace {
    pub fn name(&self) -> &str {
        match self {
            ParamSpace::LogUniform { name, .. }
            | ParamSpace::Uniform { name, .. }
            | ParamSpace::IntRange { name, .. }
            | ParamSpace::Choice { name, .. } => name,
        }
    }

    /// Draw one value from this dimension.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> HyperValue {
        match self {
            ParamSpace::LogUniform { lo, hi, .. } => {
                let u = rng.gen_range(lo.ln()..hi.ln());
                HyperValue::Float(u.exp())
            }
            ParamSpace::Uniform { lo, hi, .. } => HyperValue::Float(rng.gen_range(*lo..*hi)),
            ParamSpace::IntRange { lo, hi, .. } => HyperValue::Int(rng.gen_range(*lo..=*hi)),
            ParamSpace::Choice { options, .. } => {
                options[rng.gen_range(0..options.len())].clone()
            }
        }
    }

    /// Whether a concrete value lies inside this dimension.
    fn contains(&self, value: &HyperValue) -> bool {
        match self {
            ParamSpace::LogUniform { lo, hi, .. } | ParamSpace::Uniform { lo, hi, .. } => value
                .as_float()
                .is_some_and(|v| v.is_finite() && v >= *lo && v <= *hi),
            ParamSpace::IntRange { lo, hi, .. } => {
                value.as_int().is_some_and(|v| v >= *lo && v <= *hi)
            }
            ParamSpace::Choice { options, .. } => options.iter().any(|opt| {
                opt == value
                    || matches!((opt, value), (HyperValue::IntList(l), HyperValue::Int(i)) if l.as_slice() == [*i])
            }),
        }
    }
}

fn log_dim(name: &str, lo: f64, hi: f64) -> ParamSpace {
    ParamSpace::LogUniform {
        name: name.to_string(),
        lo,
        hi,
    }
}

fn uniform_dim(name: &str, lo: f64, hi: f64) -> ParamSpace {
    ParamSpace::Uniform {
        name: name.to_string(),
        lo,
        hi,
    }
}

fn int_dim(name: &str, lo: u64, hi: u64) -> ParamSpace {
    ParamSpace::IntRange {
        name: name.to_string(),
        lo,
        hi,
    }
}

/// The declared random-search space for each model family.
pub fn search_space(kind: ModelKind) -> Vec<ParamSpace> {
    match kind {
        ModelKind::Mlr => Vec::new(),
        ModelKind::Ridge | ModelKind::Lasso => vec![log_dim("lambda", 1e-4, 1e2)],
        ModelKind::Enr => vec![log_dim("lambda", 1e-4, 1e2), uniform_dim("mix", 0.0, 1.0)],
        ModelKind::Rf => vec![
            int_dim("n_trees", 100, 500),
            int_dim("max_depth", 3, 12),
            uniform_dim("feature_frac", 0.3, 1.0),
        ],
        ModelKind::Gbt => vec![
            int_dim("n_trees", 50, 500),
            log_dim("learning_rate", 0.01, 0.3),
            int_dim("max_depth", 2, 6),
            uniform_dim("lambda", 0.0, 10.0),
            uniform_dim("gamma", 0.0, 5.0),
        ],
        ModelKind::Mlp => vec![
            ParamSpace::Choice {
                name: "hidden".to_string(),
                options: vec![
                    HyperValue::IntList(vec![32]),
                    HyperValue::IntList(vec![64, 32]),
                    HyperValue::IntList(vec![128, 64]),
                ],
            },
            log_dim("learning_rate", 1e-4, 1e-2),
            log_dim("weight_decay", 1e-6, 1e-2),
        ],
    }
}

/// Fixed (non-searched) hyperparameters a spec may still set explicitly,
/// with their validity ranges.
fn auxiliary_space(kind: ModelKind) -> Vec<ParamSpace> {
    match kind {
        ModelKind::Rf => vec![int_dim("min_leaf", 1, u64::MAX)],
        ModelKind::Mlp => vec![int_dim("epochs", 0, 1_000_000)],
        _ => Vec::new(),
    }
}

/// Draw a full spec for `kind` from its declared search space.
pub fn sample_spec<R: Rng + ?Sized>(kind: ModelKind, rng: &mut R) -> ModelSpec {
    let mut spec = ModelSpec::new(kind);
    for dim in search_space(kind) {
        let value = dim.sample(rng);
        spec.params.insert(dim.name().to_string(), value);
    }
    spec
}

/// Check that every hyperparameter is a declared dimension and within bounds.
pub fn validate_spec(spec: &ModelSpec) -> Result<()> {
    let mut dims = search_space(spec.kind);
    dims.extend(auxiliary_space(spec.kind));
    for (name, value) in &spec.params {
        let Some(dim) = dims.iter().find(|d| d.name() == name) else {
            return Err(MlError::InvalidParam(format!(
                "{} has no hyperparameter '{name}'",
                spec.kind
            )));
        };
        if !dim.contains(value) {
            return Err(MlError::InvalidParam(format!(
                "hyperparameter '{name}' = {value:?} is outside the declared space {dim:?}"
            )));
        }
    }
    Ok(())
}

/// Learned parameters, tagged by family for readable JSON.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(
    tag = "family",
    bound = "T: Serialize + serde::de::DeserializeOwned + Real"
)]
pub enum FittedModel<T> {
    Linear(LinearModel<T>),
    Forest(RandomForest<T>),
    Boosted(Gbt<T>),
    Network(Mlp<T>),
}

/// A fitted model together with the spec that produced it and the training
/// column names; prediction re-selects columns by name, so feature order in
/// the incoming matrix does not matter.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "T: Serialize + serde::de::DeserializeOwned + Real")]
pub struct TrainedModel<T> {
    spec: ModelSpec,
    feature_names: Vec<String>,
    fitted: FittedModel<T>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    warnings: Vec<String>,
}

impl<T: Real + Serialize + serde::de::DeserializeOwned> TrainedModel<T> {
    pub fn kind(&self) -> ModelKind {
        self.spec.kind
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn fitted(&self) -> &FittedModel<T> {
        &self.fitted
    }

    pub fn predict(&self, x: &FeatureMatrix<T>) -> Result<Vec<T>> {
        match &self.fitted {
            FittedModel::Linear(m) => {
                let ordered = x.select_columns(&self.feature_names)?;
                m.predict(&ordered)
            }
            FittedModel::Forest(m) => m.predict(x),
            FittedModel::Boosted(m) => m.predict(x),
            FittedModel::Network(m) => m.predict(x),
        }
    }

    /// Per-feature importance where the family defines one: normalized total
    /// gain for boosted trees, raw split gain for forests.
    pub fn importance(&self) -> Option<Vec<(String, T)>> {
        match &self.fitted {
            FittedModel::Boosted(m) => Some(m.importance()),
            FittedModel::Forest(m) => Some(m.importance()),
            _ => None,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self)
            .map_err(|e| MlError::Serialization(format!("model to JSON: {e}")))
    }

    pub fn from_json(json: &str) -> Result<Self> {
        serde_json::from_str(json)
            .map_err(|e| MlError::Serialization(format!("model from JSON: {e}")))
    }
}

/// Fit `spec` on `(x, y)`. `seed` feeds the stochastic families (RF row
/// bootstraps and per-node feature draws, MLP weight initialization) and is
/// ignored by the deterministic ones.
pub fn fit_model<T: Real + Serialize + serde::de::DeserializeOwned>(
    spec: &ModelSpec,
    x: &FeatureMatrix<T>,
    y: &[T],
    seed: u64,
) -> Result<TrainedModel<T>> {
    validate_spec(spec)?;
    let mut warnings = Vec::new();
    let fitted = match spec.kind {
        ModelKind::Mlr => {
            let fit = fit_mlr(x, y)?;
            warnings.extend(fit.warnings);
            FittedModel::Linear(fit.model)
        }
        ModelKind::Ridge => {
            let lambda = T::of(spec.float("lambda", 1.0)?);
            FittedModel::Linear(fit_ridge(x, y, lambda)?)
        }
        ModelKind::Lasso => {
            let lambda = T::of(spec.float("lambda", 1.0)?);
            FittedModel::Linear(fit_lasso(x, y, lambda)?)
        }
        ModelKind::Enr => {
            let lambda = T::of(spec.float("lambda", 1.0)?);
            let mix = T::of(spec.float("mix", 0.5)?);
            FittedModel::Linear(fit_enr(x, y, lambda, mix)?)
        }
        ModelKind::Rf => {
            let params = RfParams {
                n_trees: spec.int("n_trees", 100)? as usize,
                max_depth: spec.int("max_depth", 7)? as usize,
                min_leaf: spec.int("min_leaf", 2)? as usize,
                feature_frac: T::of(spec.float("feature_frac", 1.0 / 3.0)?),
                bootstrap: true,
                seed,
            };
            FittedModel::Forest(fit_forest(x, y, &params)?)
        }
        ModelKind::Gbt => {
            let params = GbtParams {
                n_trees: spec.int("n_trees", 100)? as usize,
                learning_rate: T::of(spec.float("learning_rate", 0.1)?),
                max_depth: spec.int("max_depth", 3)? as usize,
                lambda: T::of(spec.float("lambda", 1.0)?),
                gamma: T::of(spec.float("gamma", 0.0)?),
            };
            FittedModel::Boosted(fit_gbt(x, y, &params)?)
        }
        ModelKind::Mlp => {
            let params = MlpParams {
                hidden: spec
                    .int_list("hidden", &[32])?
                    .into_iter()
                    .map(|v| v as usize)
                    .collect(),
                learning_rate: T::of(spec.float("learning_rate", 1e-3)?),
                epochs: spec.int("epochs", 500)? as usize,
                weight_decay: T::of(spec.float("weight_decay", 1e-6)?),
                momentum: T::of(0.9),
                seed,
            };
            FittedModel::Network(fit_mlp(x, y, &params)?)
        }
    };
    Ok(TrainedModel {
        spec: spec.clone(),
        feature_names: x.names().to_vec(),
        fitted,
        warnings,
    })
}
