//! PLY 1.0 reader/writer (ASCII and binary little-endian).
//!
//! Supported schema:
//! - `element vertex`: required `x`,`y`,`z` (float32/float64); optional
//!   `red`,`green`,`blue` (uint8) and `nx`,`ny`,`nz` (float32/float64);
//!   unrecognized properties are skipped.
//! - `element face` (optional): `property list <int> <int> vertex_indices`;
//!   polygons with more than 3 vertices are fan-triangulated. A file with a
//!   face element parses to a [`TriangleMesh`], otherwise to a [`PointCloud`].
//! - other elements are skipped.
//!
//! Big-endian files are rejected with an unsupported-format error. Meshes read
//! from disk are welded at 1e-6 × bounding-box diagonal so duplicated
//! vertices cannot inflate the connected-component count downstream.

mod read;
mod write;

pub use read::read_ply;
pub use write::{write_ply, write_ply_cloud, write_ply_mesh};

use crate::cloud::PointCloud;
use crate::error::{CoreError, Result};
use crate::mesh::TriangleMesh;
use crate::scalar::Real;

/// Result of parsing a PLY file: a point cloud, or a mesh when the file
/// declares a face element.
#[derive(Clone, Debug, PartialEq)]
pub enum PlyData<T> {
    Cloud(PointCloud<T>),
    Mesh(TriangleMesh<T>),
}

impl<T: Real> PlyData<T> {
    pub fn into_cloud(self) -> Result<PointCloud<T>> {
        match self {
            PlyData::Cloud(c) => Ok(c),
            PlyData::Mesh(_) => Err(CoreError::PlyUnsupported(
                "expected a point cloud but the file declares a face element".into(),
            )),
        }
    }

    pub fn into_mesh(self) -> Result<TriangleMesh<T>> {
        match self {
            PlyData::Mesh(m) => Ok(m),
            PlyData::Cloud(_) => Err(CoreError::PlyUnsupported(
                "expected a mesh but the file has no face element".into(),
            )),
        }
    }
}

/// Scalar widens to the PLY type written on disk. Implemented for `f32`
/// ("float") and `f64` ("double").
pub trait PlyFloat: Real {
    /// The PLY property type name for this scalar.
    const PLY_TYPE: &'static str;
    /// Appends the little-endian encoding of `self`.
    fn write_le(self, out: &mut Vec<u8>);
}

impl PlyFloat for f32 {
    const PLY_TYPE: &'static str = "float";
    fn write_le(self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.to_le_bytes());
    }
}

impl PlyFloat for f64 {
    const PLY_TYPE: &'static str = "double";
    fn write_le(self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.to_le_bytes());
    }
}

/// PLY scalar property types.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum ScalarType {
    I8,
    U8,
    I16,
    U16,
    I32,
    U32,
    F32,
    F64,
}

impl ScalarType {
    pub(crate) fn parse(token: &str) -> Option<Self> {
        Some(match token {
            "char" | "int8" => ScalarType::I8,
            "uchar" | "uint8" => ScalarType::U8,
            "short" | "int16" => ScalarType::I16,
            "ushort" | "uint16" => ScalarType::U16,
            "int" | "int32" => ScalarType::I32,
            "uint" | "uint32" => ScalarType::U32,
            "float" | "float32" => ScalarType::F32,
            "double" | "float64" => ScalarType::F64,
            _ => return None,
        })
    }

    pub(crate) fn is_float(self) -> bool {
        matches!(self, ScalarType::F32 | ScalarType::F64)
    }

    pub(crate) fn is_integer(self) -> bool {
        !self.is_float()
    }
}

#[derive(Clone, Debug)]
pub(crate) enum PropKind {
    Scalar(ScalarType),
    List { count: ScalarType, item: ScalarType },
}

#[derive(Clone, Debug)]
pub(crate) struct PropertyDef {
    pub name: String,
    pub kind: PropKind,
}

#[derive(Clone, Debug)]
pub(crate) struct ElementDef {
    pub name: String,
    pub count: usize,
    pub properties: Vec<PropertyDef>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Format {
    Ascii,
    BinaryLittleEndian,
}

#[derive(Debug)]
pub(crate) struct Header {
    pub format: Format,
    pub elements: Vec<ElementDef>,
    /// Byte offset where the body starts.
    pub body_offset: usize,
    /// Number of header lines (for ASCII body line numbering).
    pub header_lines: usize,
}
