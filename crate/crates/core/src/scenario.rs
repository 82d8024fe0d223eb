//! Cluster-level scenario simulation against a trained map.
//!
//! K-means centroids are placed on the SOM, edited in raw units, and
//! re-mapped. Sensitivity analysis perturbs the size of each edit (the change
//! relative to the base profile) and tallies where the profile lands.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kmeans::KMeansResult;
use crate::som::{best_matching_unit, SomError, SomModel};

pub const DEFAULT_SAMPLES: usize = 1000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    #[error("the SOM has no training cases attached")]
    NotTrained,
    #[error("k-means result and SOM were computed on different datasets")]
    DatasetMismatch,
    #[error("cluster {cluster} does not exist (k = {k})")]
    InvalidCluster { cluster: usize, k: usize },
    #[error("unknown feature {0:?}")]
    UnknownFeature(String),
    #[error("value for {0:?} is not finite")]
    NonFiniteValue(String),
    #[error("cluster {0} has no edited features to perturb")]
    NoEditsToPerturb(usize),
    #[error("deviation {value} for {feature:?} is outside [0, 1]")]
    InvalidDeviation { feature: String, value: f64 },
    #[error("deviation given for unedited feature {0:?}")]
    DeviationForUneditedFeature(String),
    #[error("n_samples must be at least 1")]
    InvalidSampleCount,
    #[error(transparent)]
    Som(#[from] SomError),
}

impl ScenarioError {
    pub fn code(&self) -> &'static str {
        match self {
            ScenarioError::NotTrained => "not_trained",
            ScenarioError::DatasetMismatch => "dataset_mismatch",
            ScenarioError::InvalidCluster { .. } => "invalid_cluster",
            ScenarioError::UnknownFeature(_) => "unknown_feature",
            ScenarioError::NonFiniteValue(_) => "non_finite_value",
            ScenarioError::NoEditsToPerturb(_) => "no_edits_to_perturb",
            ScenarioError::InvalidDeviation { .. } => "invalid_deviation",
            ScenarioError::DeviationForUneditedFeature(_) => "deviation_for_unedited_feature",
            ScenarioError::InvalidSampleCount => "invalid_sample_count",
            ScenarioError::Som(e) => e.code(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioState {
    pub feature_names: Vec<String>,
    /// K-means centroids, raw units.
    pub base_profiles: Vec<Vec<f64>>,
    pub edited_profiles: Vec<Vec<f64>>,
    pub base_bmu: Vec<usize>,
    pub current_bmu: Vec<usize>,
    pub dataset_fingerprint: String,
}

impl ScenarioState {
    pub fn n_clusters(&self) -> usize {
        self.base_profiles.len()
    }

    fn check_cluster(&self, cluster: usize) -> Result<(), ScenarioError> {
        if cluster >= self.n_clusters() {
            return Err(ScenarioError::InvalidCluster {
                cluster,
                k: self.n_clusters(),
            });
        }
        Ok(())
    }

    /// Feature indices where the cluster's edited profile differs from its base.
    pub fn edited_features(&self, cluster: usize) -> Vec<usize> {
        let base = &self.base_profiles[cluster];
        let edited = &self.edited_profiles[cluster];
        (0..base.len()).filter(|&j| base[j] != edited[j]).collect()
    }
}

/// "Model setup": places every cluster centroid on the map.
pub fn setup(model: &SomModel, kmeans: &KMeansResult) -> Result<ScenarioState, ScenarioError> {
    if model.assignments.is_empty() {
        return Err(ScenarioError::NotTrained);
    }
    if model.dataset_fingerprint != kmeans.dataset_fingerprint
        || model.feature_names != kmeans.feature_names
    {
        return Err(ScenarioError::DatasetMismatch);
    }
    let base_bmu = kmeans
        .centroids
        .iter()
        .map(|c| Ok(best_matching_unit(model, c)?.bmu))
        .collect::<Result<Vec<_>, SomError>>()?;
    Ok(ScenarioState {
        feature_names: model.feature_names.clone(),
        base_profiles: kmeans.centroids.clone(),
        edited_profiles: kmeans.centroids.clone(),
        current_bmu: base_bmu.clone(),
        base_bmu,
        dataset_fingerprint: model.dataset_fingerprint.clone(),
    })
}

/// Outcome of one "run clusters" step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioRun {
    pub cluster: usize,
    pub edits: BTreeMap<String, f64>,
    /// Full edited profile after applying `edits`.
    pub profile: Vec<f64>,
    /// Where the unedited cluster centroid maps.
    pub old_bmu: usize,
    /// Where the profile mapped before this run.
    pub previous_bmu: usize,
    pub new_bmu: usize,
    /// `new_bmu != old_bmu`.
    pub moved: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

/// Applies `edits` (raw values) to a cluster profile and re-maps it.
///
/// Edits accumulate across calls; the state is left untouched on error.
pub fn run_scenario(
    state: &mut ScenarioState,
    model: &SomModel,
    cluster: usize,
    edits: &BTreeMap<String, f64>,
) -> Result<ScenarioRun, ScenarioError> {
    state.check_cluster(cluster)?;
    if model.dataset_fingerprint != state.dataset_fingerprint {
        return Err(ScenarioError::DatasetMismatch);
    }
    let mut profile = state.edited_profiles[cluster].clone();
    for (name, &value) in edits {
        let j = state
            .feature_names
            .iter()
            .position(|f| f == name)
            .ok_or_else(|| ScenarioError::UnknownFeature(name.clone()))?;
        if !value.is_finite() {
            return Err(ScenarioError::NonFiniteValue(name.clone()));
        }
        profile[j] = value;
    }
    let new_bmu = best_matching_unit(model, &profile)?.bmu;

    let warnings = extrapolation_warnings(model, &state.feature_names, &profile);
    let previous_bmu = state.current_bmu[cluster];
    let old_bmu = state.base_bmu[cluster];
    state.edited_profiles[cluster] = profile.clone();
    state.current_bmu[cluster] = new_bmu;
    Ok(ScenarioRun {
        cluster,
        edits: edits.clone(),
        profile,
        old_bmu,
        previous_bmu,
        new_bmu,
        moved: new_bmu != old_bmu,
        warnings,
    })
}

fn extrapolation_warnings(model: &SomModel, names: &[String], profile: &[f64]) -> Vec<String> {
    if model.feature_min.len() != profile.len() {
        return Vec::new();
    }
    profile
        .iter()
        .enumerate()
        .filter(|&(j, &v)| v < model.feature_min[j] || v > model.feature_max[j])
        .map(|(j, v)| {
            format!(
                "{:?} = {v} lies outside the training range [{}, {}]",
                names[j], model.feature_min[j], model.feature_max[j]
            )
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivitySpec {
    pub cluster: usize,
    /// Fractional deviation of each edit, in [0, 1]. Edited features not
    /// listed are held at their edited value.
    #[serde(default)]
    pub deviation: BTreeMap<String, f64>,
    #[serde(default = "default_samples")]
    pub n_samples: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_samples() -> usize {
    DEFAULT_SAMPLES
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityHistogram {
    pub cluster: usize,
    pub n_samples: usize,
    pub seed: u64,
    pub deviation: BTreeMap<String, f64>,
    /// Neuron index → number of samples whose BMU it was.
    pub counts: BTreeMap<usize, u64>,
}

impl SensitivityHistogram {
    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }
}

/// Monte Carlo sensitivity of one cluster's current edits.
///
/// For an edit from base `o` to `v` with deviation `d`, each sample uses
/// `o + (v - o)(1 + u)` with `u ~ Uniform(-d, d)`, drawn independently per
/// edited feature in feature order. Unedited features stay at base.
pub fn sensitivity(
    state: &ScenarioState,
    model: &SomModel,
    spec: &SensitivitySpec,
) -> Result<SensitivityHistogram, ScenarioError> {
    state.check_cluster(spec.cluster)?;
    if spec.n_samples == 0 {
        return Err(ScenarioError::InvalidSampleCount);
    }
    let edited = state.edited_features(spec.cluster);
    if edited.is_empty() {
        return Err(ScenarioError::NoEditsToPerturb(spec.cluster));
    }
    for (name, &d) in &spec.deviation {
        let j = state
            .feature_names
            .iter()
            .position(|f| f == name)
            .ok_or_else(|| ScenarioError::UnknownFeature(name.clone()))?;
        if !(0.0..=1.0).contains(&d) {
            return Err(ScenarioError::InvalidDeviation {
                feature: name.clone(),
                value: d,
            });
        }
        if !edited.contains(&j) {
            return Err(ScenarioError::DeviationForUneditedFeature(name.clone()));
        }
    }

    let base = &state.base_profiles[spec.cluster];
    let target = &state.edited_profiles[spec.cluster];
    let perturb: Vec<(usize, f64, f64)> = edited
        .iter()
        .map(|&j| {
            let d = spec.deviation.get(&state.feature_names[j]).copied().unwrap_or(0.0);
            (j, target[j] - base[j], d)
        })
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut counts = BTreeMap::new();
    let mut profile = target.clone();
    for _ in 0..spec.n_samples {
        for &(j, delta, d) in &perturb {
            let u = d * (2.0 * rng.random::<f64>() - 1.0);
            // equals base + delta * (1 + u), exact at u = 0
            profile[j] = target[j] + delta * u;
        }
        let bmu = best_matching_unit(model, &profile)?.bmu;
        *counts.entry(bmu).or_insert(0u64) += 1;
    }
    Ok(SensitivityHistogram {
        cluster: spec.cluster,
        n_samples: spec.n_samples,
        seed: spec.seed,
        deviation: spec.deviation.clone(),
        counts,
    })
}
