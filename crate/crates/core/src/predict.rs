//! Classification of new cases against a trained map.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{CaseDataset, DataError};
use crate::som::{SomError, SomModel};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("new data columns differ from the training columns (missing: {missing:?}, extra: {extra:?})")]
pub struct SchemaError {
    pub missing: Vec<String>,
    pub extra: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PredictError {
    #[error(transparent)]
    Schema(#[from] SchemaError),
    #[error(transparent)]
    Som(#[from] SomError),
    #[error(transparent)]
    Data(#[from] DataError),
}

impl PredictError {
    pub fn code(&self) -> &'static str {
        match self {
            PredictError::Schema(_) => "schema_error",
            PredictError::Som(e) => e.code(),
            PredictError::Data(e) => e.code(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub case_id: String,
    pub best: usize,
    pub second: usize,
    pub best_distance: f64,
    pub second_distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionResult {
    pub predictions: Vec<Prediction>,
}

/// Checks that `new_data` carries exactly the training columns, in any order.
pub fn validate_schema(model: &SomModel, new_data: &CaseDataset) -> Result<(), SchemaError> {
    let has = |names: &[String], n: &String| names.iter().any(|x| x == n);
    let missing: Vec<String> = model
        .feature_names
        .iter()
        .filter(|n| !has(new_data.feature_names(), n))
        .cloned()
        .collect();
    let extra: Vec<String> = new_data
        .feature_names()
        .iter()
        .filter(|n| !has(&model.feature_names, n))
        .cloned()
        .collect();
    if missing.is_empty() && extra.is_empty() {
        Ok(())
    } else {
        Err(SchemaError { missing, extra })
    }
}

/// Reorders `new_data` columns to the training order.
pub fn canonicalize(model: &SomModel, new_data: &CaseDataset) -> Result<CaseDataset, PredictError> {
    validate_schema(model, new_data)?;
    Ok(new_data.subset_features(&model.feature_names)?)
}

/// Best and second-best neuron per case, using the model's frozen scaling.
pub fn classify(model: &SomModel, new_data: &CaseDataset) -> Result<PredictionResult, PredictError> {
    let data = canonicalize(model, new_data)?;
    let predictions = data
        .case_ids()
        .iter()
        .zip(data.rows())
        .map(|(id, row)| {
            let m = model.match_scaled(&model.scaling.apply(row)?)?;
            Ok(Prediction {
                case_id: id.clone(),
                best: m.bmu,
                second: m.second,
                best_distance: m.distance,
                second_distance: m.second_distance,
            })
        })
        .collect::<Result<Vec<_>, PredictError>>()?;
    Ok(PredictionResult { predictions })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::ScalingParams;
    use crate::som::SomConfig;

    fn model() -> SomModel {
        SomModel::from_weights(
            SomConfig::grid(1, 3),
            ScalingParams::identity(2),
            vec!["a".into(), "b".into()],
            vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![2.0, 0.0]],
        )
        .unwrap()
    }

    fn data(names: &[&str], rows: Vec<Vec<f64>>) -> CaseDataset {
        CaseDataset::from_rows(names.iter().map(|s| s.to_string()).collect(), rows).unwrap()
    }

    #[test]
    fn renamed_column_is_named() {
        let err = validate_schema(&model(), &data(&["a", "c"], vec![vec![0.0, 0.0]])).unwrap_err();
        assert_eq!(err.missing, ["b"]);
        assert_eq!(err.extra, ["c"]);
    }

    #[test]
    fn reordered_columns_are_accepted() {
        let d = data(&["b", "a"], vec![vec![1.0, 2.0]]);
        validate_schema(&model(), &d).unwrap();
        let p = classify(&model(), &d).unwrap();
        // (a, b) = (2, 1) is equidistant from neurons 1 and 2
        assert_eq!(p.predictions[0].best, 1);
        assert_eq!(p.predictions[0].second, 2);
    }

    #[test]
    fn exact_weight_has_zero_distance() {
        let p = classify(&model(), &data(&["a", "b"], vec![vec![2.0, 0.0]])).unwrap();
        assert_eq!(p.predictions[0].best, 2);
        assert_eq!(p.predictions[0].best_distance, 0.0);
        assert!(p.predictions[0].second_distance >= p.predictions[0].best_distance);
    }

    #[test]
    fn missing_column_rejected_by_classify() {
        let err = classify(&model(), &data(&["a"], vec![vec![0.0]])).unwrap_err();
        assert_eq!(err.code(), "schema_error");
    }
}
