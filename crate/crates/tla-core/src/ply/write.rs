//! PLY serialization. `read_ply(write_ply(v)) == v` for both encodings: the
//! ASCII writer prints floats in shortest round-trip form and the binary
//! writer emits exact little-endian bytes.

use super::{PlyData, PlyFloat};
use crate::cloud::PointCloud;
use crate::mesh::TriangleMesh;

fn header_common(ascii: bool, vertex_count: usize, float_ty: &str, out: &mut String) {
    out.push_str("ply\n");
    out.push_str(if ascii {
        "format ascii 1.0\n"
    } else {
        "format binary_little_endian 1.0\n"
    });
    out.push_str(&format!("element vertex {vertex_count}\n"));
    for axis in ["x", "y", "z"] {
        out.push_str(&format!("property {float_ty} {axis}\n"));
    }
}

/// Serializes a point cloud.
pub fn write_ply_cloud<T: PlyFloat>(cloud: &PointCloud<T>, ascii: bool) -> Vec<u8> {
    let mut header = String::new();
    header_common(ascii, cloud.len(), T::PLY_TYPE, &mut header);
    if cloud.colors.is_some() {
        for channel in ["red", "green", "blue"] {
            header.push_str(&format!("property uchar {channel}\n"));
        }
    }
    if cloud.normals.is_some() {
        for axis in ["nx", "ny", "nz"] {
            header.push_str(&format!("property {} {axis}\n", T::PLY_TYPE));
        }
    }
    header.push_str("end_header\n");

    let mut out = header.into_bytes();
    for i in 0..cloud.len() {
        let p = cloud.points[i];
        if ascii {
            let mut line = format!("{} {} {}", p.x, p.y, p.z);
            if let Some(colors) = &cloud.colors {
                let [r, g, b] = colors[i];
                line.push_str(&format!(" {r} {g} {b}"));
            }
            if let Some(normals) = &cloud.normals {
                let n = normals[i];
                line.push_str(&format!(" {} {} {}", n.x, n.y, n.z));
            }
            line.push('\n');
            out.extend_from_slice(line.as_bytes());
        } else {
            p.x.write_le(&mut out);
            p.y.write_le(&mut out);
            p.z.write_le(&mut out);
            if let Some(colors) = &cloud.colors {
                out.extend_from_slice(&colors[i]);
            }
            if let Some(normals) = &cloud.normals {
                let n = normals[i];
                n.x.write_le(&mut out);
                n.y.write_le(&mut out);
                n.z.write_le(&mut out);
            }
        }
    }
    out
}

/// Serializes a triangle mesh (vertex + face elements).
pub fn write_ply_mesh<T: PlyFloat>(mesh: &TriangleMesh<T>, ascii: bool) -> Vec<u8> {
    let mut header = String::new();
    header_common(ascii, mesh.vertices.len(), T::PLY_TYPE, &mut header);
    header.push_str(&format!("element face {}\n", mesh.triangles.len()));
    header.push_str("property list uchar int vertex_indices\n");
    header.push_str("end_header\n");

    let mut out = header.into_bytes();
    for v in &mesh.vertices {
        if ascii {
            out.extend_from_slice(format!("{} {} {}\n", v.x, v.y, v.z).as_bytes());
        } else {
            v.x.write_le(&mut out);
            v.y.write_le(&mut out);
            v.z.write_le(&mut out);
        }
    }
    for tri in &mesh.triangles {
        if ascii {
            out.extend_from_slice(format!("3 {} {} {}\n", tri[0], tri[1], tri[2]).as_bytes());
        } else {
            out.push(3u8);
            for &idx in tri {
                out.extend_from_slice(&(idx as i32).to_le_bytes());
            }
        }
    }
    out
}

/// Serializes either kind of PLY payload.
pub fn write_ply<T: PlyFloat>(data: &PlyData<T>, ascii: bool) -> Vec<u8> {
    match data {
        PlyData::Cloud(c) => write_ply_cloud(c, ascii),
        PlyData::Mesh(m) => write_ply_mesh(m, ascii),
    }
}
