//! Rectangular self-organizing map trained with the online Kohonen rule.
//!
//! Weights live in the (optionally) standardized feature space; every query
//! that accepts raw case values applies the model's frozen [`ScalingParams`].
//! Neurons are indexed row-major: neuron `i` sits at `(i / cols, i % cols)`.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{CaseDataset, DataError, ScalingParams};
use crate::kmeans::{dist, sq_dist, KMeansResult};
use crate::stats::{one_way_anova, Statistic};

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SomError {
    #[error("invalid SOM configuration: {0}")]
    ConfigInvalid(String),
    #[error("expected {expected} features, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("feature schema differs from the trained model")]
    SchemaMismatch {
        expected: Vec<String>,
        found: Vec<String>,
    },
    #[error("ANOVA needs at least two non-empty neurons")]
    InsufficientGroups,
    #[error("ANOVA needs more cases than non-empty neurons")]
    NoResidualDegreesOfFreedom,
    #[error("k-means result and SOM were computed on different datasets")]
    DatasetMismatch,
    #[error("unsupported model format version {0}")]
    UnsupportedVersion(u32),
    #[error("model document is malformed: {0}")]
    Malformed(String),
    #[error(transparent)]
    Data(#[from] DataError),
}

impl SomError {
    pub fn code(&self) -> &'static str {
        match self {
            SomError::ConfigInvalid(_) => "config_invalid",
            SomError::DimensionMismatch { .. } => "dimension_mismatch",
            SomError::SchemaMismatch { .. } => "schema_mismatch",
            SomError::InsufficientGroups => "insufficient_groups",
            SomError::NoResidualDegreesOfFreedom => "no_residual_df",
            SomError::DatasetMismatch => "dataset_mismatch",
            SomError::UnsupportedVersion(_) => "unsupported_version",
            SomError::Malformed(_) => "malformed_model",
            SomError::Data(e) => e.code(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SomConfig {
    pub grid_rows: usize,
    pub grid_cols: usize,
    /// Training steps; defaults to 100 × case count.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
    pub learning_rate: f64,
    pub seed: u64,
    pub scale_data: bool,
    /// Initial neighborhood radius in grid units; defaults to max(rows, cols) / 2.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub initial_radius: Option<f64>,
}

impl Default for SomConfig {
    fn default() -> Self {
        Self {
            grid_rows: 5,
            grid_cols: 5,
            iterations: None,
            learning_rate: 0.05,
            seed: 0,
            scale_data: true,
            initial_radius: None,
        }
    }
}

impl SomConfig {
    pub fn grid(rows: usize, cols: usize) -> Self {
        Self {
            grid_rows: rows,
            grid_cols: cols,
            ..Self::default()
        }
    }

    pub fn n_neurons(&self) -> usize {
        self.grid_rows * self.grid_cols
    }

    /// Fills defaults that depend on the data and validates the result.
    pub fn resolve(&self, n_cases: usize) -> Result<SomConfig, SomError> {
        let mut c = self.clone();
        if c.grid_rows == 0 || c.grid_cols == 0 || c.n_neurons() < 2 {
            return Err(SomError::ConfigInvalid(format!(
                "grid {}x{} must contain at least two neurons",
                c.grid_rows, c.grid_cols
            )));
        }
        let iterations = *c.iterations.get_or_insert(100 * n_cases);
        if iterations < n_cases || iterations == 0 {
            return Err(SomError::ConfigInvalid(format!(
                "iterations ({iterations}) must be at least the case count ({n_cases})"
            )));
        }
        if !(c.learning_rate > 0.0 && c.learning_rate <= 1.0) {
            return Err(SomError::ConfigInvalid(format!(
                "learning rate {} must lie in (0, 1]",
                c.learning_rate
            )));
        }
        let radius = *c
            .initial_radius
            .get_or_insert(c.grid_rows.max(c.grid_cols) as f64 / 2.0);
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(SomError::ConfigInvalid(format!(
                "initial radius {radius} must be positive"
            )));
        }
        Ok(c)
    }
}

/// Grid geometry helpers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Grid {
    pub rows: usize,
    pub cols: usize,
}

impl Grid {
    pub fn coords(&self, neuron: usize) -> (usize, usize) {
        (neuron / self.cols, neuron % self.cols)
    }

    pub fn squared_distance(&self, a: usize, b: usize) -> f64 {
        let (ra, ca) = self.coords(a);
        let (rb, cb) = self.coords(b);
        let dr = ra as f64 - rb as f64;
        let dc = ca as f64 - cb as f64;
        dr * dr + dc * dc
    }

    /// Neighbors at Chebyshev distance 1 (diagonals included).
    pub fn adjacent(&self, a: usize, b: usize) -> bool {
        let (ra, ca) = self.coords(a);
        let (rb, cb) = self.coords(b);
        ra.abs_diff(rb).max(ca.abs_diff(cb)) == 1
    }
}

/// Two nearest neurons for one profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BmuMatch {
    pub bmu: usize,
    pub second: usize,
    pub distance: f64,
    pub second_distance: f64,
}

/// Two smallest-distance neurons; ties resolve to the lower index.
fn two_nearest(weights: &[Vec<f64>], x: &[f64]) -> BmuMatch {
    let (mut b, mut bd) = (usize::MAX, f64::INFINITY);
    let (mut s, mut sd) = (usize::MAX, f64::INFINITY);
    for (j, w) in weights.iter().enumerate() {
        let d = sq_dist(x, w);
        if d < bd {
            s = b;
            sd = bd;
            b = j;
            bd = d;
        } else if d < sd {
            s = j;
            sd = d;
        }
    }
    BmuMatch {
        bmu: b,
        second: s,
        distance: bd.sqrt(),
        second_distance: sd.sqrt(),
    }
}

fn nearest(weights: &[Vec<f64>], x: &[f64]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (j, w) in weights.iter().enumerate() {
        let d = sq_dist(x, w);
        if d < best_d {
            best_d = d;
            best = j;
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnovaRow {
    pub feature: String,
    pub f: Statistic,
    pub p: f64,
    pub df_between: usize,
    pub df_within: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SomModel {
    pub format_version: u32,
    /// Resolved configuration (all defaults filled in).
    pub config: SomConfig,
    pub feature_names: Vec<String>,
    pub case_ids: Vec<String>,
    pub dataset_fingerprint: String,
    pub scaling: ScalingParams,
    /// Observed raw range per feature in the training data.
    pub feature_min: Vec<f64>,
    pub feature_max: Vec<f64>,
    /// Row-major neuron weights in the scaled space.
    pub weights: Vec<Vec<f64>>,
    /// BMU of each training case.
    pub assignments: Vec<usize>,
    pub quantization_error: f64,
    pub topographic_error: f64,
    /// Empty when ANOVA was not computable (see warnings).
    pub anova: Vec<AnovaRow>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

/// Stepwise online trainer. [`train_som`] drives it to completion.
pub struct SomTrainer {
    config: SomConfig,
    grid: Grid,
    points: Vec<Vec<f64>>,
    weights: Vec<Vec<f64>>,
    rng: ChaCha8Rng,
    step: usize,
    total: usize,
}

impl SomTrainer {
    pub fn new(data: &CaseDataset, config: &SomConfig) -> Result<Self, SomError> {
        data.require_cases(2)?;
        let config = config.resolve(data.n_cases())?;
        let scaling = ScalingParams::fit(data, config.scale_data);
        let points = scaling.transform(data)?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

        // sample initial weights from the cases without replacement,
        // starting a fresh permutation whenever the cases run out
        let n_neurons = config.n_neurons();
        let mut weights = Vec::with_capacity(n_neurons);
        let mut order: Vec<usize> = Vec::new();
        while weights.len() < n_neurons {
            if order.is_empty() {
                order = (0..points.len()).collect();
                order.shuffle(&mut rng);
                order.reverse();
            }
            let i = order.pop().expect("non-empty");
            weights.push(points[i].clone());
        }

        Ok(Self {
            grid: Grid {
                rows: config.grid_rows,
                cols: config.grid_cols,
            },
            total: config.iterations.expect("resolved"),
            config,
            points,
            weights,
            rng,
            step: 0,
        })
    }

    pub fn total_steps(&self) -> usize {
        self.total
    }

    pub fn steps_done(&self) -> usize {
        self.step
    }

    pub fn weights(&self) -> &[Vec<f64>] {
        &self.weights
    }

    /// Learning rate and neighborhood radius at step `t`.
    pub fn schedule(&self, t: usize) -> (f64, f64) {
        let frac = 1.0 - t as f64 / self.total as f64;
        let alpha = self.config.learning_rate * frac;
        let sigma = (self.config.initial_radius.expect("resolved") * frac).max(0.5);
        (alpha, sigma)
    }

    /// Advances training up to (but not beyond) step `until`.
    pub fn run_until(&mut self, until: usize) {
        let until = until.min(self.total);
        while self.step < until {
            let (alpha, sigma) = self.schedule(self.step);
            let x = &self.points[self.rng.random_range(0..self.points.len())];
            let b = nearest(&self.weights, x);
            let denom = 2.0 * sigma * sigma;
            for (j, w) in self.weights.iter_mut().enumerate() {
                let h = (-self.grid.squared_distance(j, b) / denom).exp();
                let rate = alpha * h;
                for (wv, xv) in w.iter_mut().zip(x) {
                    *wv += rate * (xv - *wv);
                }
            }
            self.step += 1;
        }
    }

    /// Mean distance from training cases to their current BMU.
    pub fn quantization_error(&self) -> f64 {
        let total: f64 = self
            .points
            .iter()
            .map(|p| dist(p, &self.weights[nearest(&self.weights, p)]))
            .sum();
        total / self.points.len() as f64
    }

    /// Finishes training and evaluates the map on its training data.
    pub fn finish(mut self, data: &CaseDataset) -> Result<SomModel, SomError> {
        self.run_until(self.total);
        let scaling = ScalingParams::fit(data, self.config.scale_data);
        SomModel::from_weights(self.config, scaling, data.feature_names().to_vec(), self.weights)?
            .with_training_cases(data)
    }
}

/// Trains a map on `data`. Deterministic for a fixed configuration and seed.
pub fn train_som(data: &CaseDataset, config: &SomConfig) -> Result<SomModel, SomError> {
    SomTrainer::new(data, config)?.finish(data)
}

impl SomModel {
    /// A model from explicit weights (scaled space), with no cases attached.
    pub fn from_weights(
        config: SomConfig,
        scaling: ScalingParams,
        feature_names: Vec<String>,
        weights: Vec<Vec<f64>>,
    ) -> Result<Self, SomError> {
        let m = feature_names.len();
        if weights.len() != config.n_neurons() || weights.len() < 2 {
            return Err(SomError::ConfigInvalid(format!(
                "{} weight vectors for a {}x{} grid",
                weights.len(),
                config.grid_rows,
                config.grid_cols
            )));
        }
        if scaling.len() != m {
            return Err(SomError::DimensionMismatch {
                expected: m,
                found: scaling.len(),
            });
        }
        if let Some(w) = weights.iter().find(|w| w.len() != m) {
            return Err(SomError::DimensionMismatch {
                expected: m,
                found: w.len(),
            });
        }
        Ok(Self {
            format_version: MODEL_FORMAT_VERSION,
            config,
            feature_names,
            case_ids: Vec::new(),
            dataset_fingerprint: String::new(),
            scaling,
            feature_min: Vec::new(),
            feature_max: Vec::new(),
            weights,
            assignments: Vec::new(),
            quantization_error: 0.0,
            topographic_error: 0.0,
            anova: Vec::new(),
            warnings: Vec::new(),
        })
    }

    /// Attaches a training dataset: assignments, quality metrics, ANOVA and ranges.
    pub fn with_training_cases(mut self, data: &CaseDataset) -> Result<Self, SomError> {
        self.check_schema(data)?;
        let mut warnings = Vec::new();
        if self.scaling.enabled {
            for j in self.scaling.constant_features() {
                warnings.push(format!(
                    "feature {:?} is constant and was scaled to 0",
                    self.feature_names[j]
                ));
            }
        }
        self.assignments = self.assign(data)?;
        self.quantization_error = quantization_error(&self, data)?;
        self.topographic_error = topographic_error(&self, data)?;
        self.anova = match anova_by_neuron(&self, data) {
            Ok(rows) => rows,
            Err(e @ (SomError::InsufficientGroups | SomError::NoResidualDegreesOfFreedom)) => {
                warnings.push(format!("ANOVA skipped: {e}"));
                Vec::new()
            }
            Err(e) => return Err(e),
        };
        let m = data.n_features();
        self.feature_min = (0..m)
            .map(|j| data.column(j).fold(f64::INFINITY, f64::min))
            .collect();
        self.feature_max = (0..m)
            .map(|j| data.column(j).fold(f64::NEG_INFINITY, f64::max))
            .collect();
        let empty = self.case_counts().iter().filter(|&&c| c == 0).count();
        if empty > 0 {
            warnings.push(format!("{empty} of {} neurons have no cases", self.n_neurons()));
        }
        self.case_ids = data.case_ids().to_vec();
        self.dataset_fingerprint = data.fingerprint();
        self.warnings = warnings;
        Ok(self)
    }

    pub fn grid(&self) -> Grid {
        Grid {
            rows: self.config.grid_rows,
            cols: self.config.grid_cols,
        }
    }

    pub fn n_neurons(&self) -> usize {
        self.weights.len()
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn check_schema(&self, data: &CaseDataset) -> Result<(), SomError> {
        if data.feature_names() != self.feature_names.as_slice() {
            return Err(SomError::SchemaMismatch {
                expected: self.feature_names.clone(),
                found: data.feature_names().to_vec(),
            });
        }
        Ok(())
    }

    /// Two nearest neurons for an already-scaled profile.
    pub fn match_scaled(&self, scaled: &[f64]) -> Result<BmuMatch, SomError> {
        if scaled.len() != self.n_features() {
            return Err(SomError::DimensionMismatch {
                expected: self.n_features(),
                found: scaled.len(),
            });
        }
        Ok(two_nearest(&self.weights, scaled))
    }

    /// BMU for each case in `data`.
    pub fn assign(&self, data: &CaseDataset) -> Result<Vec<usize>, SomError> {
        self.check_schema(data)?;
        data.rows()
            .map(|r| Ok(self.match_scaled(&self.scaling.apply(r)?)?.bmu))
            .collect()
    }

    /// Number of training cases per neuron.
    pub fn case_counts(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.n_neurons()];
        for &a in &self.assignments {
            counts[a] += 1;
        }
        counts
    }

    /// Neuron weights mapped back to raw feature units.
    pub fn raw_weights(&self) -> Vec<Vec<f64>> {
        self.weights
            .iter()
            .map(|w| self.scaling.invert(w).expect("weights match schema"))
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, SomError> {
        let model: SomModel =
            serde_json::from_str(text).map_err(|e| SomError::Malformed(e.to_string()))?;
        if model.format_version != MODEL_FORMAT_VERSION {
            return Err(SomError::UnsupportedVersion(model.format_version));
        }
        Ok(model)
    }
}

/// Two nearest neurons for a profile given in raw units.
pub fn best_matching_unit(model: &SomModel, raw_row: &[f64]) -> Result<BmuMatch, SomError> {
    if raw_row.len() != model.n_features() {
        return Err(SomError::Data(DataError::LengthMismatch {
            expected: model.n_features(),
            found: raw_row.len(),
        }));
    }
    model.match_scaled(&model.scaling.apply(raw_row)?)
}

fn matches(model: &SomModel, data: &CaseDataset) -> Result<Vec<BmuMatch>, SomError> {
    model.check_schema(data)?;
    data.rows()
        .map(|r| model.match_scaled(&model.scaling.apply(r)?))
        .collect()
}

/// Mean scaled-space distance from each case to its BMU.
pub fn quantization_error(model: &SomModel, data: &CaseDataset) -> Result<f64, SomError> {
    let m = matches(model, data)?;
    Ok(m.iter().map(|b| b.distance).sum::<f64>() / m.len() as f64)
}

/// Fraction of cases whose first and second BMUs are not grid neighbors.
pub fn topographic_error(model: &SomModel, data: &CaseDataset) -> Result<f64, SomError> {
    let grid = model.grid();
    let m = matches(model, data)?;
    let bad = m.iter().filter(|b| !grid.adjacent(b.bmu, b.second)).count();
    Ok(bad as f64 / m.len() as f64)
}

/// One-way ANOVA per feature, grouping cases by their BMU.
pub fn anova_by_neuron(model: &SomModel, data: &CaseDataset) -> Result<Vec<AnovaRow>, SomError> {
    let groups = model.assign(data)?;
    let mut labels = groups.clone();
    labels.sort_unstable();
    labels.dedup();
    if labels.len() < 2 {
        return Err(SomError::InsufficientGroups);
    }
    if data.n_cases() <= labels.len() {
        return Err(SomError::NoResidualDegreesOfFreedom);
    }
    Ok(model
        .feature_names
        .iter()
        .enumerate()
        .map(|(j, name)| {
            let values: Vec<f64> = data.column(j).collect();
            let a = one_way_anova(&values, &groups).expect("group counts checked");
            AnovaRow {
                feature: name.clone(),
                f: a.f,
                p: a.p,
                df_between: a.df_between,
                df_within: a.df_within,
            }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadrantProfile {
    pub neuron: usize,
    pub row: usize,
    pub col: usize,
    /// Neuron weights in raw feature units.
    pub weights: Vec<f64>,
    /// Raw weight minus the global feature mean (bar-plot heights).
    pub deviation: Vec<f64>,
    pub case_count: usize,
    pub empty: bool,
}

/// Per-neuron profiles in raw units, centered on the global mean for plotting.
pub fn quadrant_profiles(model: &SomModel) -> Vec<QuadrantProfile> {
    let grid = model.grid();
    let counts = model.case_counts();
    model
        .raw_weights()
        .into_iter()
        .enumerate()
        .map(|(i, w)| {
            let (row, col) = grid.coords(i);
            let deviation = w.iter().zip(&model.scaling.mean).map(|(v, m)| v - m).collect();
            QuadrantProfile {
                neuron: i,
                row,
                col,
                weights: w,
                deviation,
                case_count: counts[i],
                empty: counts[i] == 0,
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamesCell {
    pub neuron: usize,
    pub row: usize,
    pub col: usize,
    /// `"{cluster}-{case_id}"` for each case mapped to this neuron.
    pub labels: Vec<String>,
}

/// Case labels per neuron, cluster id first and case id second.
pub fn names_plot_data(model: &SomModel, kmeans: &KMeansResult) -> Result<Vec<NamesCell>, SomError> {
    if model.case_ids != kmeans.case_ids
        || model.dataset_fingerprint != kmeans.dataset_fingerprint
        || model.assignments.len() != kmeans.assignments.len()
    {
        return Err(SomError::DatasetMismatch);
    }
    let grid = model.grid();
    let mut cells: Vec<NamesCell> = (0..model.n_neurons())
        .map(|i| {
            let (row, col) = grid.coords(i);
            NamesCell {
                neuron: i,
                row,
                col,
                labels: Vec::new(),
            }
        })
        .collect();
    for ((case, &neuron), &cluster) in model
        .case_ids
        .iter()
        .zip(&model.assignments)
        .zip(&kmeans.assignments)
    {
        cells[neuron].labels.push(format!("{cluster}-{case}"));
    }
    Ok(cells)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(m: usize) -> Vec<String> {
        (0..m).map(|j| format!("f{j}")).collect()
    }

    fn hand_model(rows: usize, cols: usize, weights: Vec<Vec<f64>>) -> SomModel {
        let m = weights[0].len();
        SomModel::from_weights(
            SomConfig::grid(rows, cols),
            ScalingParams::identity(m),
            names(m),
            weights,
        )
        .unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(SomConfig::grid(1, 1).resolve(10).is_err());
        assert!(SomConfig::grid(0, 3).resolve(10).is_err());
        let c = SomConfig {
            iterations: Some(5),
            ..SomConfig::grid(2, 2)
        };
        assert!(c.resolve(10).is_err());
        let c = SomConfig {
            learning_rate: 0.0,
            ..SomConfig::grid(2, 2)
        };
        assert!(c.resolve(10).is_err());
        let r = SomConfig::grid(4, 6).resolve(10).unwrap();
        assert_eq!(r.iterations, Some(1000));
        assert_eq!(r.initial_radius, Some(3.0));
    }

    #[test]
    fn bmu_ties_go_to_lowest_index() {
        let m = hand_model(1, 3, vec![vec![0.0], vec![2.0], vec![4.0]]);
        let b = best_matching_unit(&m, &[1.0]).unwrap();
        assert_eq!((b.bmu, b.second), (0, 1));
        let b = best_matching_unit(&m, &[4.0]).unwrap();
        assert_eq!((b.bmu, b.distance), (2, 0.0));
        assert_eq!(b.second, 1);
    }

    #[test]
    fn bmu_with_duplicate_weights_still_differs() {
        let m = hand_model(1, 2, vec![vec![1.0], vec![1.0]]);
        let b = best_matching_unit(&m, &[1.0]).unwrap();
        assert_eq!((b.bmu, b.second), (0, 1));
    }

    #[test]
    fn bmu_length_mismatch() {
        let m = hand_model(1, 2, vec![vec![0.0, 0.0], vec![1.0, 1.0]]);
        assert!(matches!(
            best_matching_unit(&m, &[1.0]).unwrap_err(),
            SomError::Data(DataError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn grid_adjacency_is_chebyshev() {
        let g = Grid { rows: 5, cols: 5 };
        assert!(g.adjacent(0, 1));
        assert!(g.adjacent(0, 6));
        assert!(!g.adjacent(0, 2));
        assert!(!g.adjacent(0, 24));
        assert!(!g.adjacent(3, 3));
        assert_eq!(g.squared_distance(0, 24), 32.0);
    }

    #[test]
    fn quantization_error_single_case() {
        let m = hand_model(1, 2, vec![vec![0.0, 0.0], vec![10.0, 10.0]]);
        let d = CaseDataset::from_rows(names(2), vec![vec![3.0, 4.0]]).unwrap();
        assert_eq!(quantization_error(&m, &d).unwrap(), 5.0);
        let d = CaseDataset::from_rows(names(2), vec![vec![0.0, 0.0], vec![10.0, 10.0]]).unwrap();
        assert_eq!(quantization_error(&m, &d).unwrap(), 0.0);
    }

    #[test]
    fn schema_mismatch_on_metrics() {
        let m = hand_model(1, 2, vec![vec![0.0], vec![1.0]]);
        let d = CaseDataset::from_rows(vec!["other".into()], vec![vec![0.0]]).unwrap();
        assert!(matches!(
            quantization_error(&m, &d).unwrap_err(),
            SomError::SchemaMismatch { .. }
        ));
        assert!(topographic_error(&m, &d).is_err());
    }

    #[test]
    fn anova_needs_two_groups() {
        let m = hand_model(1, 2, vec![vec![0.0], vec![100.0]]);
        let d = CaseDataset::from_rows(names(1), vec![vec![1.0], vec![2.0], vec![3.0]]).unwrap();
        assert_eq!(anova_by_neuron(&m, &d).unwrap_err(), SomError::InsufficientGroups);
        let model = m.with_training_cases(&d).unwrap();
        assert!(model.anova.is_empty());
        assert!(model.warnings.iter().any(|w| w.contains("ANOVA")));
    }

    #[test]
    fn quadrant_profiles_unscale_and_center() {
        let d = CaseDataset::from_rows(names(1), vec![vec![0.0], vec![2.0], vec![4.0]]).unwrap();
        let scaling = ScalingParams::fit(&d, true);
        let m = SomModel::from_weights(
            SomConfig::grid(1, 3),
            scaling,
            names(1),
            vec![vec![-1.0], vec![0.0], vec![1.0]],
        )
        .unwrap()
        .with_training_cases(&d)
        .unwrap();
        let p = quadrant_profiles(&m);
        assert_eq!(p[0].weights, [0.0]);
        assert_eq!(p[1].deviation, [0.0]);
        assert_eq!(p[2].deviation, [2.0]);
        assert!(p.iter().all(|q| q.case_count == 1 && !q.empty));
    }

    #[test]
    fn trainer_respects_step_budget() {
        let d = CaseDataset::from_rows(names(1), (0..10).map(|i| vec![i as f64]).collect()).unwrap();
        let mut t = SomTrainer::new(
            &d,
            &SomConfig {
                iterations: Some(40),
                ..SomConfig::grid(1, 3)
            },
        )
        .unwrap();
        t.run_until(15);
        assert_eq!(t.steps_done(), 15);
        t.run_until(1000);
        assert_eq!(t.steps_done(), 40);
        let (a, s) = t.schedule(39);
        assert!(a > 0.0 && s == 0.5);
    }

    #[test]
    fn more_neurons_than_cases_initializes() {
        let d = CaseDataset::from_rows(names(1), vec![vec![0.0], vec![1.0], vec![2.0]]).unwrap();
        let m = train_som(&d, &SomConfig::grid(3, 3)).unwrap();
        assert_eq!(m.n_neurons(), 9);
        assert_eq!(m.assignments.len(), 3);
    }

    #[test]
    fn json_version_check() {
        let m = hand_model(1, 2, vec![vec![0.0], vec![1.0]]);
        let text = m.to_json().replace("\"format_version\": 1", "\"format_version\": 9");
        assert_eq!(SomModel::from_json(&text).unwrap_err(), SomError::UnsupportedVersion(9));
    }
}
