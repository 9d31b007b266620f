//! PLY codec integration tests: round-trips in both formats and both scalar
//! widths, plus the forced-error cases (truncation, unsupported layouts,
//! malformed content with line numbers).

use tla_core::math::Vec3;
use tla_core::{
    read_ply, write_ply_cloud, write_ply_mesh, CoreError, PlyData, PointCloud, TriangleMesh,
};

fn sample_cloud_f64() -> PointCloud<f64> {
    // Values chosen to stress decimal round-tripping: a non-terminating
    // binary fraction sum, a tiny magnitude, and plain integers.
    let points = vec![
        Vec3::new(0.1 + 0.2, -1.25, 3.0),
        Vec3::new(1e-30, 12345.6789, -0.0),
        Vec3::new(7.0, -8.5, 9.0625),
    ];
    let colors = vec![[0u8, 128, 255], [17, 34, 51], [200, 0, 3]];
    let normals = vec![
        Vec3::new(0.0, 0.0, 1.0),
        Vec3::new(1.0, 0.0, 0.0),
        Vec3::new(1.0, 2.0, 3.0).normalized().unwrap(),
    ];
    PointCloud {
        points,
        colors: Some(colors),
        normals: Some(normals),
    }
}

fn tetrahedron_f64() -> TriangleMesh<f64> {
    TriangleMesh::new(
        vec![
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(0.0, 1.0, 0.0),
            Vec3::new(0.0, 0.0, 1.0),
        ],
        vec![[0, 2, 1], [0, 1, 3], [0, 3, 2], [1, 2, 3]],
    )
}

#[test]
fn ascii_cloud_round_trip_is_exact_f64() {
    let cloud = sample_cloud_f64();
    let bytes = write_ply_cloud(&cloud, true);
    let back: PointCloud<f64> = read_ply(&bytes).unwrap().into_cloud().unwrap();
    assert_eq!(back.points.len(), cloud.points.len());
    for (a, b) in back.points.iter().zip(&cloud.points) {
        // Shortest round-trip decimal printing must reproduce bits exactly.
        assert_eq!(a.x.to_bits(), b.x.to_bits());
        assert_eq!(a.y.to_bits(), b.y.to_bits());
        assert_eq!(a.z.to_bits(), b.z.to_bits());
    }
    assert_eq!(back.colors, cloud.colors);
    let (bn, cn) = (back.normals.unwrap(), cloud.normals.unwrap());
    for (a, b) in bn.iter().zip(&cn) {
        assert_eq!(a.to_array().map(f64::to_bits), b.to_array().map(f64::to_bits));
    }
}

#[test]
fn binary_cloud_round_trip_is_bit_exact_both_widths() {
    let cloud = sample_cloud_f64();
    let bytes = write_ply_cloud(&cloud, false);
    let back: PointCloud<f64> = read_ply(&bytes).unwrap().into_cloud().unwrap();
    for (a, b) in back.points.iter().zip(&cloud.points) {
        assert_eq!(a.to_array().map(f64::to_bits), b.to_array().map(f64::to_bits));
    }
    assert_eq!(back.colors, cloud.colors);

    // f32 path: write as "float", read back at the same width.
    let cloud32 = PointCloud::<f32> {
        points: cloud
            .points
            .iter()
            .map(|p| Vec3::new(p.x as f32, p.y as f32, p.z as f32))
            .collect(),
        colors: cloud.colors.clone(),
        normals: None,
    };
    let bytes32 = write_ply_cloud(&cloud32, false);
    assert!(
        String::from_utf8_lossy(&bytes32[..bytes32.len().min(200)]).contains("property float x")
    );
    let back32: PointCloud<f32> = read_ply(&bytes32).unwrap().into_cloud().unwrap();
    for (a, b) in back32.points.iter().zip(&cloud32.points) {
        assert_eq!(a.to_array().map(f32::to_bits), b.to_array().map(f32::to_bits));
    }
}

#[test]
fn f64_files_declare_double_precision() {
    let cloud = sample_cloud_f64();
    let bytes = write_ply_cloud(&cloud, true);
    let header = String::from_utf8_lossy(&bytes[..bytes.len().min(400)]).to_string();
    assert!(header.contains("property double x"));
    assert!(header.contains("format ascii 1.0"));
}

#[test]
fn ascii_f32_cloud_round_trip_is_exact() {
    let cloud32 = PointCloud::<f32> {
        points: vec![
            Vec3::new(0.1f32, 2.5, -3.375),
            Vec3::new(1.0e-20, 6.02e7, 0.33333334),
        ],
        colors: None,
        normals: None,
    };
    let bytes = write_ply_cloud(&cloud32, true);
    let back: PointCloud<f32> = read_ply(&bytes).unwrap().into_cloud().unwrap();
    for (a, b) in back.points.iter().zip(&cloud32.points) {
        assert_eq!(a.to_array().map(f32::to_bits), b.to_array().map(f32::to_bits));
    }
}

#[test]
fn mesh_round_trip_ascii_and_binary() {
    let mesh = tetrahedron_f64();
    for ascii in [true, false] {
        let bytes = write_ply_mesh(&mesh, ascii);
        let back: TriangleMesh<f64> = read_ply(&bytes).unwrap().into_mesh().unwrap();
        assert_eq!(back.vertices.len(), 4);
        assert_eq!(back.triangles, mesh.triangles);
        for (a, b) in back.vertices.iter().zip(&mesh.vertices) {
            assert_eq!(a.to_array(), b.to_array());
        }
    }
}

#[test]
fn quad_faces_are_fan_triangulated() {
    let text = "ply\n\
format ascii 1.0\n\
element vertex 4\n\
property float x\n\
property float y\n\
property float z\n\
element face 1\n\
property list uchar int vertex_indices\n\
end_header\n\
0 0 0\n\
1 0 0\n\
1 1 0\n\
0 1 0\n\
4 0 1 2 3\n";
    let mesh: TriangleMesh<f64> = read_ply(text.as_bytes()).unwrap().into_mesh().unwrap();
    assert_eq!(mesh.triangles, vec![[0, 1, 2], [0, 2, 3]]);
}

#[test]
fn mesh_read_welds_duplicate_vertices() {
    // Two triangles sharing an edge, but written with duplicated corner
    // vertices (as triangle-soup exporters do).
    let text = "ply\n\
format ascii 1.0\n\
element vertex 6\n\
property float x\n\
property float y\n\
property float z\n\
element face 2\n\
property list uchar int vertex_indices\n\
end_header\n\
0 0 0\n\
1 0 0\n\
0 1 0\n\
1 0 0\n\
1 1 0\n\
0 1 0\n\
3 0 1 2\n\
3 3 4 5\n";
    let mesh: TriangleMesh<f64> = read_ply(text.as_bytes()).unwrap().into_mesh().unwrap();
    assert_eq!(mesh.vertices.len(), 4);
    assert_eq!(mesh.triangles.len(), 2);
}

#[test]
fn truncated_ascii_body_is_a_truncation_error() {
    // Header declares 10 vertices; body contains only 9.
    let mut text = String::from(
        "ply\nformat ascii 1.0\nelement vertex 10\nproperty float x\nproperty float y\nproperty float z\nend_header\n",
    );
    for i in 0..9 {
        text.push_str(&format!("{i} 0 0\n"));
    }
    let err = read_ply::<f64>(text.as_bytes()).unwrap_err();
    assert!(matches!(err, CoreError::PlyTruncated(_)), "got {err:?}");
}

#[test]
fn truncated_binary_body_is_a_truncation_error() {
    let cloud = sample_cloud_f64();
    let bytes = write_ply_cloud(&cloud, false);
    let cut = &bytes[..bytes.len() - 5];
    let err = read_ply::<f64>(cut).unwrap_err();
    assert!(matches!(err, CoreError::PlyTruncated(_)), "got {err:?}");
}

#[test]
fn trailing_bytes_after_binary_body_are_ignored() {
    let cloud = sample_cloud_f64();
    let mut bytes = write_ply_cloud(&cloud, false);
    bytes.extend_from_slice(b"junk after the declared data");
    let back: PointCloud<f64> = read_ply(&bytes).unwrap().into_cloud().unwrap();
    assert_eq!(back.points.len(), cloud.points.len());
}

#[test]
fn big_endian_is_reported_unsupported() {
    let text = "ply\nformat binary_big_endian 1.0\nelement vertex 0\nproperty float x\nproperty float y\nproperty float z\nend_header\n";
    let err = read_ply::<f64>(text.as_bytes()).unwrap_err();
    assert!(matches!(err, CoreError::PlyUnsupported(_)), "got {err:?}");
}

#[test]
fn integer_coordinates_are_reported_unsupported() {
    let text = "ply\nformat ascii 1.0\nelement vertex 1\nproperty int x\nproperty float y\nproperty float z\nend_header\n1 2 3\n";
    let err = read_ply::<f64>(text.as_bytes()).unwrap_err();
    assert!(matches!(err, CoreError::PlyUnsupported(_)), "got {err:?}");
}

#[test]
fn missing_coordinate_is_reported_unsupported() {
    let text = "ply\nformat ascii 1.0\nelement vertex 1\nproperty float x\nproperty float y\nend_header\n1 2\n";
    let err = read_ply::<f64>(text.as_bytes()).unwrap_err();
    assert!(matches!(err, CoreError::PlyUnsupported(_)), "got {err:?}");
}

#[test]
fn unknown_elements_and_properties_are_skipped() {
    let text = "ply\n\
format ascii 1.0\n\
comment made by hand\n\
element vertex 2\n\
property float x\n\
property float y\n\
property float z\n\
property float confidence\n\
element edge 1\n\
property int vertex1\n\
property int vertex2\n\
end_header\n\
0 0 0 0.9\n\
1 1 1 0.5\n\
0 1\n";
    let cloud: PointCloud<f64> = read_ply(text.as_bytes()).unwrap().into_cloud().unwrap();
    assert_eq!(cloud.points.len(), 2);
    assert_eq!(cloud.points[1].to_array(), [1.0, 1.0, 1.0]);
    assert!(cloud.colors.is_none());
}

#[test]
fn partial_color_channels_yield_no_colors() {
    let text = "ply\nformat ascii 1.0\nelement vertex 1\nproperty float x\nproperty float y\nproperty float z\nproperty uchar red\nproperty uchar green\nend_header\n0 0 0 10 20\n";
    let cloud: PointCloud<f64> = read_ply(text.as_bytes()).unwrap().into_cloud().unwrap();
    assert!(cloud.colors.is_none());
}

#[test]
fn malformed_ascii_value_reports_line_number() {
    let text = "ply\nformat ascii 1.0\nelement vertex 2\nproperty float x\nproperty float y\nproperty float z\nend_header\n0 0 0\n1 oops 1\n";
    // The bad token sits on line 9 (7 header lines + 2 body lines).
    match read_ply::<f64>(text.as_bytes()).unwrap_err() {
        CoreError::PlyParse { line, .. } => assert_eq!(line, 9),
        other => panic!("expected a parse error with a line number, got {other:?}"),
    }
}

#[test]
fn extra_tokens_on_a_line_are_rejected_with_line_number() {
    let text = "ply\nformat ascii 1.0\nelement vertex 1\nproperty float x\nproperty float y\nproperty float z\nend_header\n0 0 0 7\n";
    match read_ply::<f64>(text.as_bytes()).unwrap_err() {
        CoreError::PlyParse { line, .. } => assert_eq!(line, 8),
        other => panic!("expected a parse error with a line number, got {other:?}"),
    }
}

#[test]
fn bad_magic_and_bad_version_are_rejected() {
    let err = read_ply::<f64>(b"plyx\nformat ascii 1.0\nend_header\n").unwrap_err();
    assert!(matches!(err, CoreError::PlyParse { line: 1, .. }), "got {err:?}");
    let err = read_ply::<f64>(b"ply\nformat ascii 2.0\nend_header\n").unwrap_err();
    assert!(matches!(err, CoreError::PlyParse { line: 2, .. }), "got {err:?}");
}

#[test]
fn face_index_out_of_range_is_rejected() {
    let text = "ply\nformat ascii 1.0\nelement vertex 3\nproperty float x\nproperty float y\nproperty float z\nelement face 1\nproperty list uchar int vertex_indices\nend_header\n0 0 0\n1 0 0\n0 1 0\n3 0 1 3\n";
    assert!(read_ply::<f64>(text.as_bytes()).is_err());
}

#[test]
fn face_with_fewer_than_three_vertices_is_rejected() {
    let text = "ply\nformat ascii 1.0\nelement vertex 2\nproperty float x\nproperty float y\nproperty float z\nelement face 1\nproperty list uchar int vertex_indices\nend_header\n0 0 0\n1 0 0\n2 0 1\n";
    assert!(read_ply::<f64>(text.as_bytes()).is_err());
}

#[test]
fn empty_cloud_round_trips() {
    let cloud = PointCloud::<f64>::new(Vec::new());
    for ascii in [true, false] {
        let bytes = write_ply_cloud(&cloud, ascii);
        let back: PointCloud<f64> = read_ply(&bytes).unwrap().into_cloud().unwrap();
        assert!(back.is_empty());
    }
}

#[test]
fn cloud_file_refuses_mesh_interpretation_and_vice_versa() {
    let cloud_bytes = write_ply_cloud(&sample_cloud_f64(), true);
    assert!(read_ply::<f64>(&cloud_bytes).unwrap().into_mesh().is_err());
    let mesh_bytes = write_ply_mesh(&tetrahedron_f64(), true);
    assert!(read_ply::<f64>(&mesh_bytes).unwrap().into_cloud().is_err());
    // A face element (even with zero faces) marks the file as a mesh.
    match read_ply::<f64>(&mesh_bytes).unwrap() {
        PlyData::Mesh(_) => {}
        PlyData::Cloud(_) => panic!("file with a face element must read as a mesh"),
    }
}

#[test]
fn crlf_line_endings_are_tolerated() {
    let text = "ply\r\nformat ascii 1.0\r\nelement vertex 1\r\nproperty float x\r\nproperty float y\r\nproperty float z\r\nend_header\r\n1 2 3\r\n";
    let cloud: PointCloud<f64> = read_ply(text.as_bytes()).unwrap().into_cloud().unwrap();
    assert_eq!(cloud.points[0].to_array(), [1.0, 2.0, 3.0]);
}

mod fuzz {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        /// Arbitrary bytes must never panic the parser — only return errors.
        #[test]
        fn arbitrary_bytes_never_panic(data in proptest::collection::vec(any::<u8>(), 0..512)) {
            let _ = read_ply::<f64>(&data);
        }

        /// A valid binary file with arbitrary bytes appended still parses
        /// (declared counts bound the body; the tail is ignored).
        #[test]
        fn appended_bytes_never_corrupt_binary(tail in proptest::collection::vec(any::<u8>(), 0..64)) {
            let mut bytes = write_ply_cloud(&sample_cloud_f64(), false);
            bytes.extend_from_slice(&tail);
            let cloud: PointCloud<f64> = read_ply(&bytes).unwrap().into_cloud().unwrap();
            prop_assert_eq!(cloud.points.len(), 3);
        }

        /// Truncating a valid binary file anywhere inside the body yields an
        /// error (never a panic, never a silently short cloud).
        #[test]
        fn truncation_anywhere_is_an_error(cut_back in 1usize..72) {
            let bytes = write_ply_cloud(&sample_cloud_f64(), false);
            let cut = bytes.len().saturating_sub(cut_back);
            let result = read_ply::<f64>(&bytes[..cut]);
            prop_assert!(result.is_err());
        }
    }
}
