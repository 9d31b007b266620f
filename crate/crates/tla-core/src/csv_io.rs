//! Dataset CSV codec.
//!
//! Column schema (header mandatory, ',' separator, '.' decimal point, UTF-8):
//! `plant_id,cultivar,experiment,layer,height_cm,length_cm,width_cm,
//! aspect_ratio,volume_cm3,surface_area_cm2,bbox_area_cm2,bbox_volume_cm3,
//! n_components,tla_cm2`

use crate::dataset::{Dataset, MeshFeatures, Sample};
use crate::error::{CoreError, Result};

/// The full CSV header in column order.
pub const CSV_COLUMNS: [&str; 14] = [
    "plant_id",
    "cultivar",
    "experiment",
    "layer",
    "height_cm",
    "length_cm",
    "width_cm",
    "aspect_ratio",
    "volume_cm3",
    "surface_area_cm2",
    "bbox_area_cm2",
    "bbox_volume_cm3",
    "n_components",
    "tla_cm2",
];

fn parse_float(field: &str, column: &str, row: usize) -> Result<f64> {
    field.trim().parse::<f64>().map_err(|_| {
        CoreError::DatasetInvalid(format!(
            "row {row}: column {column} has non-numeric value {field:?}"
        ))
    })
}

/// Parses the dataset CSV and validates all dataset invariants.
pub fn read_dataset_csv(bytes: &[u8]) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(bytes);

    let headers = reader.headers()?.clone();
    let actual: Vec<&str> = headers.iter().collect();
    if actual != CSV_COLUMNS {
        return Err(CoreError::DatasetInvalid(format!(
            "header mismatch: expected {CSV_COLUMNS:?}, found {actual:?}"
        )));
    }

    let mut samples = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 2; // 1-based, after the header line
        let record = record?;
        if record.len() != CSV_COLUMNS.len() {
            return Err(CoreError::DatasetInvalid(format!(
                "row {row}: expected {} fields, found {}",
                CSV_COLUMNS.len(),
                record.len()
            )));
        }
        let field = |c: usize| record.get(c).unwrap_or("");
        let layer: u32 = field(3).parse().map_err(|_| {
            CoreError::DatasetInvalid(format!(
                "row {row}: column layer has non-integer value {:?}",
                field(3)
            ))
        })?;
        let n_components: u32 = field(12).parse().map_err(|_| {
            CoreError::DatasetInvalid(format!(
                "row {row}: column n_components has non-integer value {:?}",
                field(12)
            ))
        })?;
        samples.push(Sample {
            plant_id: field(0).to_string(),
            cultivar: field(1).parse()?,
            experiment: field(2).parse()?,
            layer,
            features: MeshFeatures {
                height: parse_float(field(4), "height_cm", row)?,
                length: parse_float(field(5), "length_cm", row)?,
                width: parse_float(field(6), "width_cm", row)?,
                aspect_ratio: parse_float(field(7), "aspect_ratio", row)?,
                volume: parse_float(field(8), "volume_cm3", row)?,
                surface_area: parse_float(field(9), "surface_area_cm2", row)?,
                bbox_area: parse_float(field(10), "bbox_area_cm2", row)?,
                bbox_volume: parse_float(field(11), "bbox_volume_cm3", row)?,
                n_components,
                flags: Default::default(),
            },
            tla: parse_float(field(13), "tla_cm2", row)?,
        });
    }
    Dataset::new(samples)
}

/// Serializes a dataset to CSV bytes. Floats print in Rust's shortest
/// round-trip decimal form, so `read_dataset_csv(write_dataset_csv(d)) == d`.
pub fn write_dataset_csv(dataset: &Dataset) -> Result<Vec<u8>> {
    let mut writer = csv::WriterBuilder::new().from_writer(Vec::new());
    writer.write_record(CSV_COLUMNS)?;
    for s in &dataset.samples {
        let f = &s.features;
        writer.write_record([
            s.plant_id.as_str(),
            s.cultivar.as_str(),
            &s.experiment.to_string(),
            &s.layer.to_string(),
            &f.height.to_string(),
            &f.length.to_string(),
            &f.width.to_string(),
            &f.aspect_ratio.to_string(),
            &f.volume.to_string(),
            &f.surface_area.to_string(),
            &f.bbox_area.to_string(),
            &f.bbox_volume.to_string(),
            &f.n_components.to_string(),
            &s.tla.to_string(),
        ])?;
    }
    writer
        .into_inner()
        .map_err(|e| CoreError::DatasetInvalid(format!("CSV flush failed: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{Cultivar, Experiment};

    fn one_row_csv() -> String {
        format!(
            "{}\nplant_01,Mohamed,1,0,10,5,4,1.25,100,60,20,200,1,1500.5\n",
            CSV_COLUMNS.join(",")
        )
    }

    #[test]
    fn one_row_parses() {
        let d = read_dataset_csv(one_row_csv().as_bytes()).unwrap();
        assert_eq!(d.len(), 1);
        let s = &d.samples[0];
        assert_eq!(s.plant_id, "plant_01");
        assert_eq!(s.cultivar, Cultivar::Mohamed);
        assert_eq!(s.experiment, Experiment::One);
        assert_eq!(s.layer, 0);
        assert_eq!(s.features.height, 10.0);
        assert_eq!(s.features.n_components, 1);
        assert_eq!(s.tla, 1500.5);
    }

    #[test]
    fn negative_tla_is_validation_error() {
        let csv = one_row_csv().replace("1500.5", "-5");
        let err = read_dataset_csv(csv.as_bytes()).unwrap_err();
        assert!(matches!(err, CoreError::DatasetInvalid(_)), "{err}");
    }

    #[test]
    fn unknown_cultivar_is_validation_error() {
        let csv = one_row_csv().replace("Mohamed", "Unknown");
        let err = read_dataset_csv(csv.as_bytes()).unwrap_err();
        assert!(matches!(err, CoreError::DatasetInvalid(_)), "{err}");
    }

    #[test]
    fn duplicate_plant_layer_is_validation_error() {
        let mut csv = one_row_csv();
        csv.push_str("plant_01,Mohamed,1,0,10,5,4,1.25,100,60,20,200,1,1500.5\n");
        let err = read_dataset_csv(csv.as_bytes()).unwrap_err();
        assert!(matches!(err, CoreError::DatasetInvalid(_)), "{err}");
    }

    #[test]
    fn header_mismatch_is_rejected() {
        let csv = one_row_csv().replace("plant_id", "plant");
        assert!(read_dataset_csv(csv.as_bytes()).is_err());
    }

    #[test]
    fn round_trip_preserves_awkward_floats() {
        let mut d = read_dataset_csv(one_row_csv().as_bytes()).unwrap();
        d.samples[0].tla = 0.1 + 0.2; // not exactly representable in decimal
        d.samples[0].features.surface_area = f64::MIN_POSITIVE * 1e10;
        let bytes = write_dataset_csv(&d).unwrap();
        let back = read_dataset_csv(&bytes).unwrap();
        assert_eq!(d, back);
    }
}
