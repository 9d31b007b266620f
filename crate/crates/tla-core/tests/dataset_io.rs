//! Dataset CSV and camera sidecar integration tests.

use tla_core::math::Vec3;
use tla_core::{
    read_camera_poses, read_dataset_csv, write_camera_poses, write_dataset_csv, CameraPoses,
    CoreError, Cultivar, Dataset, Experiment, MeshFeatures, Sample,
};

/// Builds a dataset of `n_plants` plants with 5 peeling layers each, using
/// awkward float values to exercise decimal round-tripping.
fn synthetic_dataset(n_plants: usize) -> Dataset {
    let cultivars = Cultivar::ALL;
    let mut samples = Vec::new();
    for p in 0..n_plants {
        let cultivar = cultivars[p % cultivars.len()];
        let experiment = if p % 2 == 0 { Experiment::One } else { Experiment::Two };
        let base_tla = 400.0 + (p as f64) * (0.1 + 0.2);
        for layer in 0..5u32 {
            // TLA must be non-increasing with the layer index.
            let tla = base_tla - f64::from(layer) * 61.37;
            let h = 10.0 + (p as f64) * 0.01 + f64::from(layer) * 1e-4;
            samples.push(Sample {
                plant_id: format!("plant_{p:03}"),
                cultivar,
                experiment,
                layer,
                features: MeshFeatures {
                    height: h,
                    length: h * 1.5,
                    width: h * 0.75,
                    aspect_ratio: 2.0,
                    volume: h * h * h,
                    surface_area: h * h * 6.123456789,
                    bbox_area: h * h * 1.125,
                    bbox_volume: h * h * h * 1.125,
                    n_components: 1 + (layer % 3),
                    flags: Default::default(),
                },
                tla,
            });
        }
    }
    Dataset::new(samples).unwrap()
}

#[test]
fn csv_round_trip_is_exact_for_two_hundred_samples() {
    let dataset = synthetic_dataset(40); // 40 plants × 5 layers = 200 rows
    assert_eq!(dataset.len(), 200);
    let bytes = write_dataset_csv(&dataset).unwrap();
    let back = read_dataset_csv(&bytes).unwrap();
    assert_eq!(back.samples.len(), dataset.samples.len());
    for (a, b) in back.samples.iter().zip(&dataset.samples) {
        assert_eq!(a.plant_id, b.plant_id);
        assert_eq!(a.cultivar, b.cultivar);
        assert_eq!(a.experiment, b.experiment);
        assert_eq!(a.layer, b.layer);
        assert_eq!(a.tla.to_bits(), b.tla.to_bits());
        let (fa, fb) = (a.features.as_array(), b.features.as_array());
        for (x, y) in fa.iter().zip(&fb) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }
}

#[test]
fn csv_header_is_stable() {
    let dataset = synthetic_dataset(1);
    let bytes = write_dataset_csv(&dataset).unwrap();
    let text = String::from_utf8(bytes).unwrap();
    let header = text.lines().next().unwrap();
    assert_eq!(
        header,
        "plant_id,cultivar,experiment,layer,height_cm,length_cm,width_cm,aspect_ratio,\
         volume_cm3,surface_area_cm2,bbox_area_cm2,bbox_volume_cm3,n_components,tla_cm2"
            .replace(' ', "")
    );
}

#[test]
fn header_mismatch_is_rejected() {
    let bad = b"plant,cultivar,experiment\np1,mohamed,1\n";
    let err = read_dataset_csv(bad).unwrap_err();
    assert!(matches!(err, CoreError::DatasetInvalid(_)), "got {err:?}");
}

#[test]
fn bad_rows_report_their_row_number() {
    let dataset = synthetic_dataset(1);
    let mut text = String::from_utf8(write_dataset_csv(&dataset).unwrap()).unwrap();
    // Corrupt the height field of the second data row (file row 3).
    let lines: Vec<&str> = text.lines().collect();
    let mut fields: Vec<String> = lines[2].split(',').map(str::to_string).collect();
    fields[4] = "not_a_number".into();
    let mut rebuilt: Vec<String> = lines.iter().map(|l| l.to_string()).collect();
    rebuilt[2] = fields.join(",");
    text = rebuilt.join("\n");
    let err = read_dataset_csv(text.as_bytes()).unwrap_err();
    let msg = err.to_string();
    assert!(msg.contains("row 3"), "error should name row 3: {msg}");
}

#[test]
fn unknown_cultivar_is_rejected() {
    let dataset = synthetic_dataset(1);
    let text = String::from_utf8(write_dataset_csv(&dataset).unwrap()).unwrap();
    let text = text.replacen("Mohamed", "TomatoX", 1);
    assert!(read_dataset_csv(text.as_bytes()).is_err());
}

#[test]
fn rising_tla_within_a_plant_is_rejected_on_read() {
    let mut dataset = synthetic_dataset(1);
    // Make layer 4 larger than layer 3: violates monotone peeling.
    let n = dataset.samples.len();
    dataset.samples[n - 1].tla = dataset.samples[n - 2].tla + 50.0;
    let bytes = write_csv_unvalidated(&dataset);
    let err = read_dataset_csv(&bytes).unwrap_err();
    assert!(matches!(err, CoreError::DatasetInvalid(_)), "got {err:?}");
}

/// Serializes without invoking dataset validation, to let tests craft
/// deliberately invalid files.
fn write_csv_unvalidated(dataset: &Dataset) -> Vec<u8> {
    let mut out = String::new();
    out.push_str(
        "plant_id,cultivar,experiment,layer,height_cm,length_cm,width_cm,aspect_ratio,volume_cm3,surface_area_cm2,bbox_area_cm2,bbox_volume_cm3,n_components,tla_cm2\n",
    );
    for s in &dataset.samples {
        let f = &s.features;
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            s.plant_id,
            s.cultivar.as_str(),
            s.experiment.as_number(),
            s.layer,
            f.height,
            f.length,
            f.width,
            f.aspect_ratio,
            f.volume,
            f.surface_area,
            f.bbox_area,
            f.bbox_volume,
            f.n_components,
            s.tla
        ));
    }
    out.into_bytes()
}

#[test]
fn duplicate_plant_layer_pairs_are_rejected() {
    let mut dataset = synthetic_dataset(1);
    let clone = dataset.samples[0].clone();
    dataset.samples.push(clone);
    let bytes = write_csv_unvalidated(&dataset);
    assert!(read_dataset_csv(&bytes).is_err());
}

#[test]
fn camera_sidecar_round_trips() {
    let poses = CameraPoses::new(vec![
        Vec3::new(1.5, -2.25, 3.0),
        Vec3::new(0.1 + 0.2, 0.0, -7.75),
        Vec3::new(100.0, 200.0, 300.0),
    ]);
    let bytes = write_camera_poses(&poses).unwrap();
    let back: CameraPoses<f64> = read_camera_poses(&bytes).unwrap();
    assert_eq!(back.positions.len(), 3);
    for (a, b) in back.positions.iter().zip(&poses.positions) {
        assert_eq!(a.to_array().map(f64::to_bits), b.to_array().map(f64::to_bits));
    }
    let centroid = back.centroid().unwrap();
    let expected = (poses.positions[0] + poses.positions[1] + poses.positions[2]) / 3.0;
    assert!((centroid - expected).norm() < 1e-12);
}

#[test]
fn camera_sidecar_rejects_unknown_fields_and_bad_shapes() {
    let err = read_camera_poses::<f64>(br#"{"positions": [[1,2,3]], "rotations": []}"#).unwrap_err();
    assert!(matches!(err, CoreError::CameraSchema(_)), "got {err:?}");
    let err = read_camera_poses::<f64>(br#"{"positions": [[1,2]]}"#).unwrap_err();
    assert!(matches!(err, CoreError::CameraSchema(_)), "got {err:?}");
    let err = read_camera_poses::<f64>(b"not json at all").unwrap_err();
    assert!(matches!(err, CoreError::CameraSchema(_)), "got {err:?}");
}

#[test]
fn camera_sidecar_reads_f32() {
    let poses: CameraPoses<f32> = read_camera_poses(br#"{"positions": [[0.5, 1.5, 2.5]]}"#).unwrap();
    assert_eq!(poses.positions[0].to_array(), [0.5f32, 1.5, 2.5]);
}
