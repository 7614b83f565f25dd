//! Versioned JSON container for a calibration model.
//!
//! ```json
//! { "schema": "coinft-calibration/1", "mode": "full", "lambda": 1.2e-3,
//!   "baseline": [12 counts], "matrix": [6 rows, row-major],
//!   "training_rmse": [6], "n_train": 125,
//!   "temp_compensator": null | { "reference_temp": 25.0, "coeffs": [[a0,a1,a2] × 12], ... } }
//! ```
//!
//! Floats are written in shortest round-trip form, so a save/load cycle is
//! exact.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Baseline, CalibrationError, CalibrationModel, FeatureSet, TempCompensator};

pub const SCHEMA: &str = "coinft-calibration/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    schema: String,
    mode: FeatureSet,
    lambda: f64,
    n_train: usize,
    baseline: Baseline,
    matrix: Vec<Vec<f64>>,
    training_rmse: [f64; 6],
    temp_compensator: Option<TempCompensator>,
}

pub fn to_json(model: &CalibrationModel) -> String {
    let f = ModelFile {
        schema: SCHEMA.to_string(),
        mode: model.feature_set,
        lambda: model.ridge,
        n_train: model.n_train,
        baseline: model.baseline,
        matrix: model.matrix.clone(),
        training_rmse: model.training_rmse,
        temp_compensator: model.compensator.clone(),
    };
    let mut s = serde_json::to_string_pretty(&f).expect("model serializes");
    s.push('\n');
    s
}

pub fn from_json(text: &str) -> Result<CalibrationModel, CalibrationError> {
    let f: ModelFile = serde_json::from_str(text)
        .map_err(|e| CalibrationError::InvalidModel(format!("malformed model file: {e}")))?;
    if f.schema != SCHEMA {
        return Err(CalibrationError::InvalidModel(format!(
            "unsupported schema {:?}, expected {SCHEMA:?}",
            f.schema
        )));
    }
    let model = CalibrationModel {
        feature_set: f.mode,
        matrix: f.matrix,
        baseline: f.baseline,
        ridge: f.lambda,
        n_train: f.n_train,
        training_rmse: f.training_rmse,
        compensator: f.temp_compensator,
    };
    model.validate()?;
    Ok(model)
}

pub fn save(model: &CalibrationModel, path: &Path) -> std::io::Result<()> {
    fs::write(path, to_json(model))
}

pub fn load(path: &Path) -> Result<CalibrationModel, CalibrationError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CalibrationError::InvalidModel(format!("{}: {e}", path.display())))?;
    from_json(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model() -> CalibrationModel {
        CalibrationModel {
            feature_set: FeatureSet::ShearOnly,
            matrix: (0..6)
                .map(|r| (0..16).map(|c| (r * 16 + c) as f64 / 7.0 - 1e-7).collect())
                .collect(),
            baseline: [1011.25; 12],
            ridge: 0.1 / 3.0,
            n_train: 100,
            training_rmse: [0.1, 0.2, 0.3, 0.4, 0.5, 1.0 / 3.0],
            compensator: Some(TempCompensator::identity(25.0, &[1.0 / 3.0; 12])),
        }
    }

    #[test]
    fn exact_round_trip() {
        let m = model();
        assert_eq!(from_json(&to_json(&m)).unwrap(), m);
    }

    #[test]
    fn schema_checked() {
        let text = to_json(&model()).replace(SCHEMA, "coinft-calibration/0");
        assert!(from_json(&text).is_err());
    }

    #[test]
    fn shape_checked() {
        let mut m = model();
        m.matrix[2].pop();
        assert!(from_json(&to_json(&m)).is_err());
    }
}
