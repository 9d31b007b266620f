//! Dataset rows: per-"onion"-stage observations joining mesh features with
//! ground-truth total leaf area (TLA) and plant metadata, plus the CSV codec.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use crate::error::{CoreError, Result};
use crate::scalar::Real;

/// Tomato cultivars used in the source experiments.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Cultivar {
    Mohamed,
    HahmsGelbe,
    RedRobin,
}

impl Cultivar {
    pub const ALL: [Cultivar; 3] = [Cultivar::Mohamed, Cultivar::HahmsGelbe, Cultivar::RedRobin];

    pub fn as_str(&self) -> &'static str {
        match self {
            Cultivar::Mohamed => "Mohamed",
            Cultivar::HahmsGelbe => "HahmsGelbe",
            Cultivar::RedRobin => "RedRobin",
        }
    }
}

impl FromStr for Cultivar {
    type Err = CoreError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "Mohamed" => Ok(Cultivar::Mohamed),
            "HahmsGelbe" => Ok(Cultivar::HahmsGelbe),
            "RedRobin" => Ok(Cultivar::RedRobin),
            other => Err(CoreError::DatasetInvalid(format!(
                "unknown cultivar token {other:?} (expected Mohamed, HahmsGelbe, or RedRobin)"
            ))),
        }
    }
}

impl fmt::Display for Cultivar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Experiment label (the study ran two growth experiments).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Experiment {
    One,
    Two,
}

impl Experiment {
    pub const ALL: [Experiment; 2] = [Experiment::One, Experiment::Two];

    pub fn as_number(&self) -> u8 {
        match self {
            Experiment::One => 1,
            Experiment::Two => 2,
        }
    }
}

impl FromStr for Experiment {
    type Err = CoreError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "1" => Ok(Experiment::One),
            "2" => Ok(Experiment::Two),
            other => Err(CoreError::DatasetInvalid(format!(
                "unknown experiment token {other:?} (expected 1 or 2)"
            ))),
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_number())
    }
}

/// Quality flags attached to a feature extraction. They are advisory and do
/// not participate in equality or the CSV schema.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct FeatureFlags {
    /// Width was zero, so the aspect ratio was reported as 0.
    pub degenerate_aspect_ratio: bool,
    /// The mesh was not watertight; the volume is a centroid-relative
    /// quasi-volume rather than an exact enclosed volume.
    pub quasi_volume: bool,
}

/// The nine geometric mesh parameters forming the ML feature vector.
#[derive(Clone, Copy, Debug, Default)]
pub struct MeshFeatures<T> {
    /// H: vertical extent, cm.
    pub height: T,
    /// L: longer side of the minimal XY rectangle, cm.
    pub length: T,
    /// W: shorter side of the minimal XY rectangle, cm.
    pub width: T,
    /// AR = L / W (0 when W = 0; see `flags`).
    pub aspect_ratio: T,
    /// V: enclosed volume, cm³.
    pub volume: T,
    /// A: total face area, cm².
    pub surface_area: T,
    /// A_b: area of the minimal XY rectangle, cm².
    pub bbox_area: T,
    /// V_b = A_b × H, cm³.
    pub bbox_volume: T,
    /// NC: number of connected components (0 iff the mesh is empty).
    pub n_components: u32,
    /// Advisory quality flags (not persisted, not part of equality).
    pub flags: FeatureFlags,
}

/// Equality compares the nine feature values only; `flags` are advisory
/// metadata that the CSV schema does not persist.
impl<T: PartialEq> PartialEq for MeshFeatures<T> {
    fn eq(&self, other: &Self) -> bool {
        self.height == other.height
            && self.length == other.length
            && self.width == other.width
            && self.aspect_ratio == other.aspect_ratio
            && self.volume == other.volume
            && self.surface_area == other.surface_area
            && self.bbox_area == other.bbox_area
            && self.bbox_volume == other.bbox_volume
            && self.n_components == other.n_components
    }
}

/// Names of the nine features in CSV column order.
pub const FEATURE_NAMES: [&str; 9] = [
    "height_cm",
    "length_cm",
    "width_cm",
    "aspect_ratio",
    "volume_cm3",
    "surface_area_cm2",
    "bbox_area_cm2",
    "bbox_volume_cm3",
    "n_components",
];

impl<T: Real> MeshFeatures<T> {
    /// All-zero features (the empty-mesh value).
    pub fn zeros() -> Self {
        Self::default()
    }

    /// The nine values in `FEATURE_NAMES` order.
    pub fn as_array(&self) -> [T; 9] {
        [
            self.height,
            self.length,
            self.width,
            self.aspect_ratio,
            self.volume,
            self.surface_area,
            self.bbox_area,
            self.bbox_volume,
            T::of_usize(self.n_components as usize),
        ]
    }

    /// Widens all fields to `f64`.
    pub fn as_f64(&self) -> MeshFeatures<f64> {
        MeshFeatures {
            height: self.height.as_f64(),
            length: self.length.as_f64(),
            width: self.width.as_f64(),
            aspect_ratio: self.aspect_ratio.as_f64(),
            volume: self.volume.as_f64(),
            surface_area: self.surface_area.as_f64(),
            bbox_area: self.bbox_area.as_f64(),
            bbox_volume: self.bbox_volume.as_f64(),
            n_components: self.n_components,
            flags: self.flags,
        }
    }

    /// Structural invariants: every field finite and non-negative, and
    /// length ≥ width.
    pub fn validate(&self) -> Result<()> {
        let fields = self.as_array();
        for (name, v) in FEATURE_NAMES.iter().zip(fields.iter()) {
            if !v.is_finite() || *v < T::zero() {
                return Err(CoreError::Invariant(format!(
                    "feature {name} = {v} must be finite and non-negative"
                )));
            }
        }
        if self.length < self.width {
            return Err(CoreError::Invariant(format!(
                "length {} < width {}",
                self.length, self.width
            )));
        }
        Ok(())
    }
}

/// One observation: a plant at one peeling stage.
#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    pub plant_id: String,
    pub cultivar: Cultivar,
    pub experiment: Experiment,
    /// "Onion" stage index; 0 is the unpeeled plant.
    pub layer: u32,
    pub features: MeshFeatures<f64>,
    /// Ground-truth total leaf area, cm².
    pub tla: f64,
}

/// A collection of samples with unique (plant, layer) keys.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Dataset {
    pub samples: Vec<Sample>,
}

impl Dataset {
    pub fn new(samples: Vec<Sample>) -> Result<Self> {
        let d = Self { samples };
        d.validate()?;
        Ok(d)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Checks dataset invariants: positive TLA, unique (plant_id, layer)
    /// pairs, and within every plant TLA non-increasing as the layer index
    /// grows (peeling removes leaves).
    pub fn validate(&self) -> Result<()> {
        let mut keys = BTreeSet::new();
        for s in &self.samples {
            if !(s.tla > 0.0) {
                return Err(CoreError::DatasetInvalid(format!(
                    "sample ({}, layer {}) has tla {} (must be > 0)",
                    s.plant_id, s.layer, s.tla
                )));
            }
            s.features.validate().map_err(|e| {
                CoreError::DatasetInvalid(format!(
                    "sample ({}, layer {}): {e}",
                    s.plant_id, s.layer
                ))
            })?;
            if !keys.insert((s.plant_id.clone(), s.layer)) {
                return Err(CoreError::DatasetInvalid(format!(
                    "duplicate (plant_id, layer) pair: ({}, {})",
                    s.plant_id, s.layer
                )));
            }
        }
        // Within a plant, TLA must not increase with the layer index.
        let mut per_plant: std::collections::BTreeMap<&str, Vec<(u32, f64)>> =
            std::collections::BTreeMap::new();
        for s in &self.samples {
            per_plant
                .entry(s.plant_id.as_str())
                .or_default()
                .push((s.layer, s.tla));
        }
        for (plant, mut stages) in per_plant {
            stages.sort_by_key(|&(layer, _)| layer);
            for w in stages.windows(2) {
                if w[1].1 > w[0].1 {
                    return Err(CoreError::DatasetInvalid(format!(
                        "plant {plant}: tla rises from {} (layer {}) to {} (layer {})",
                        w[0].1, w[0].0, w[1].1, w[1].0
                    )));
                }
            }
        }
        Ok(())
    }

    /// Samples whose experiment label matches.
    pub fn by_experiment(&self, experiment: Experiment) -> Vec<&Sample> {
        self.samples
            .iter()
            .filter(|s| s.experiment == experiment)
            .collect()
    }
}
