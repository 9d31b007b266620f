//! Camera-position sidecar: a minimal JSON schema decoupled from any one
//! structure-from-motion exporter.
//!
//! Schema: `{"positions": [[x, y, z], ...]}` with positions expressed in the
//! raw (pre-scaling) point-cloud coordinate frame.

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::math::Vec3;
use crate::scalar::Real;

/// Estimated camera centers in the raw cloud's coordinate frame.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CameraPoses<T> {
    pub positions: Vec<Vec3<T>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SidecarSchema {
    positions: Vec<[f64; 3]>,
}

impl<T: Real> CameraPoses<T> {
    pub fn new(positions: Vec<Vec3<T>>) -> Self {
        Self { positions }
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Arithmetic mean of the camera centers; `None` when empty.
    pub fn centroid(&self) -> Option<Vec3<T>> {
        if self.positions.is_empty() {
            return None;
        }
        let sum = self
            .positions
            .iter()
            .fold(Vec3::zero(), |acc, &p| acc + p);
        Some(sum / T::of_usize(self.positions.len()))
    }
}

/// Parses the JSON sidecar. Malformed documents (wrong arity, missing key,
/// unknown keys, non-numeric entries) yield a schema error.
pub fn read_camera_poses<T: Real>(bytes: &[u8]) -> Result<CameraPoses<T>> {
    let parsed: SidecarSchema = serde_json::from_slice(bytes)
        .map_err(|e| CoreError::CameraSchema(e.to_string()))?;
    Ok(CameraPoses {
        positions: parsed
            .positions
            .into_iter()
            .map(|[x, y, z]| Vec3::of(x, y, z))
            .collect(),
    })
}

/// Serializes poses back to the sidecar schema.
pub fn write_camera_poses<T: Real>(poses: &CameraPoses<T>) -> Result<Vec<u8>> {
    let doc = SidecarSchema {
        positions: poses
            .positions
            .iter()
            .map(|p| [p.x.as_f64(), p.y.as_f64(), p.z.as_f64()])
            .collect(),
    };
    Ok(serde_json::to_vec_pretty(&doc)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_document_parses() {
        let poses: CameraPoses<f64> =
            read_camera_poses(br#"{"positions": [[1,0,0],[0,1,0]]}"#).unwrap();
        assert_eq!(poses.len(), 2);
        assert_eq!(poses.positions[0], Vec3::new(1.0, 0.0, 0.0));
    }

    #[test]
    fn empty_positions_are_valid() {
        let poses: CameraPoses<f64> = read_camera_poses(br#"{"positions": []}"#).unwrap();
        assert!(poses.is_empty());
    }

    #[test]
    fn short_array_is_schema_error() {
        let err = read_camera_poses::<f64>(br#"{"positions": [[1,0]]}"#).unwrap_err();
        assert!(matches!(err, CoreError::CameraSchema(_)));
    }

    #[test]
    fn unknown_key_is_schema_error() {
        let err =
            read_camera_poses::<f64>(br#"{"positions": [], "intrinsics": 1}"#).unwrap_err();
        assert!(matches!(err, CoreError::CameraSchema(_)));
    }

    #[test]
    fn round_trip() {
        let poses = CameraPoses::<f64>::new(vec![
            Vec3::new(1.5, -2.25, 3.0),
            Vec3::new(0.0, 0.0, 10.0),
        ]);
        let bytes = write_camera_poses(&poses).unwrap();
        let back: CameraPoses<f64> = read_camera_poses(&bytes).unwrap();
        assert_eq!(poses, back);
    }

    #[test]
    fn centroid_of_circle_is_center() {
        let n = 8;
        let positions = (0..n)
            .map(|i| {
                let a = i as f64 / n as f64 * std::f64::consts::TAU;
                Vec3::new(a.cos() * 10.0, a.sin() * 10.0, 4.0)
            })
            .collect();
        let poses = CameraPoses::new(positions);
        let c = poses.centroid().unwrap();
        assert!(c.x.abs() < 1e-12 && c.y.abs() < 1e-12);
        assert!((c.z - 4.0).abs() < 1e-12);
    }
}
