//! K-means clustering of cases with pseudo-F and silhouette scoring.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{CaseDataset, DataError, ScalingParams};
use crate::stats::Statistic;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KMeansError {
    #[error("k must be at least 1")]
    InvalidK,
    #[error("k = {k} exceeds the number of cases ({n})")]
    KTooLarge { k: usize, n: usize },
    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),
    #[error("silhouette is undefined for a single cluster")]
    SilhouetteUndefined,
    #[error("result was computed on a different dataset")]
    DatasetMismatch,
    #[error(transparent)]
    Data(#[from] DataError),
}

impl KMeansError {
    pub fn code(&self) -> &'static str {
        match self {
            KMeansError::InvalidK => "invalid_k",
            KMeansError::KTooLarge { .. } => "k_too_large",
            KMeansError::ConfigInvalid(_) => "config_invalid",
            KMeansError::SilhouetteUndefined => "undefined",
            KMeansError::DatasetMismatch => "dataset_mismatch",
            KMeansError::Data(e) => e.code(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KMeansConfig {
    pub k: usize,
    pub seed: u64,
    pub n_init: usize,
    pub max_iter: usize,
    /// Cluster on standardized features instead of raw values.
    pub scaled: bool,
}

impl Default for KMeansConfig {
    fn default() -> Self {
        Self {
            k: 3,
            seed: 0,
            n_init: 10,
            max_iter: 100,
            scaled: false,
        }
    }
}

impl KMeansConfig {
    pub fn new(k: usize, seed: u64) -> Self {
        Self {
            k,
            seed,
            ..Self::default()
        }
    }
}

/// Per-case silhouette widths with per-cluster and overall averages.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Silhouette {
    pub values: Vec<f64>,
    pub cluster_means: Vec<f64>,
    pub overall: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KMeansResult {
    pub config: KMeansConfig,
    pub case_ids: Vec<String>,
    pub feature_names: Vec<String>,
    pub dataset_fingerprint: String,
    /// Present when clustering ran on standardized data.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scaling: Option<ScalingParams>,
    /// Cluster means in raw feature units.
    pub centroids: Vec<Vec<f64>>,
    /// Column means of the whole dataset, raw units.
    pub global_mean: Vec<f64>,
    pub assignments: Vec<usize>,
    pub cluster_sizes: Vec<usize>,
    /// Within-cluster sum of squares in the clustering space.
    pub wss: f64,
    /// Between-cluster sum of squares about the grand mean.
    pub ssb: f64,
    pub pseudo_f: Statistic,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub silhouette: Option<Silhouette>,
    /// Final wss of every initialization, by restart index.
    pub restart_wss: Vec<f64>,
    pub best_restart: usize,
    pub iterations: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl KMeansResult {
    pub fn k(&self) -> usize {
        self.config.k
    }

    fn check_dataset(&self, data: &CaseDataset) -> Result<(), KMeansError> {
        if data.case_ids() != self.case_ids.as_slice()
            || data.feature_names() != self.feature_names.as_slice()
        {
            return Err(KMeansError::DatasetMismatch);
        }
        Ok(())
    }

    /// The dataset as seen by the clustering (scaled when configured).
    pub fn clustering_space(&self, data: &CaseDataset) -> Result<Vec<Vec<f64>>, KMeansError> {
        self.check_dataset(data)?;
        Ok(match &self.scaling {
            Some(p) => p.transform(data)?,
            None => data.rows().map(<[f64]>::to_vec).collect(),
        })
    }
}

/// One Lloyd descent from fixed starting centroids.
#[derive(Debug, Clone, PartialEq)]
pub struct LloydRun {
    pub assignments: Vec<usize>,
    pub centroids: Vec<Vec<f64>>,
    /// wss after each iteration's centroid update.
    pub wss_trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

impl LloydRun {
    pub fn wss(&self) -> f64 {
        *self.wss_trace.last().expect("at least one iteration")
    }
}

pub(crate) fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub(crate) fn dist(a: &[f64], b: &[f64]) -> f64 {
    sq_dist(a, b).sqrt()
}

/// Index of the nearest centroid; equidistant ties go to the lowest index.
fn nearest(point: &[f64], centroids: &[Vec<f64>]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (j, c) in centroids.iter().enumerate() {
        let d = sq_dist(point, c);
        if d < best_d {
            best_d = d;
            best = j;
        }
    }
    best
}

fn cluster_means(points: &[Vec<f64>], assignments: &[usize], k: usize) -> Vec<Vec<f64>> {
    let m = points[0].len();
    let mut sums = vec![vec![0.0; m]; k];
    let mut counts = vec![0usize; k];
    for (p, &a) in points.iter().zip(assignments) {
        counts[a] += 1;
        for (s, v) in sums[a].iter_mut().zip(p) {
            *s += v;
        }
    }
    for (s, &c) in sums.iter_mut().zip(&counts) {
        if c > 0 {
            s.iter_mut().for_each(|v| *v /= c as f64);
        }
    }
    sums
}

fn total_wss(points: &[Vec<f64>], assignments: &[usize], centroids: &[Vec<f64>]) -> f64 {
    points
        .iter()
        .zip(assignments)
        .map(|(p, &a)| sq_dist(p, &centroids[a]))
        .sum()
}

/// Moves the point farthest from its centroid into each empty cluster.
fn repair_empty(points: &[Vec<f64>], assignments: &mut [usize], centroids: &mut [Vec<f64>]) {
    let k = centroids.len();
    let mut sizes = vec![0usize; k];
    for &a in assignments.iter() {
        sizes[a] += 1;
    }
    for j in 0..k {
        if sizes[j] > 0 {
            continue;
        }
        let mut pick = None;
        let mut pick_d = -1.0;
        for (i, p) in points.iter().enumerate() {
            let a = assignments[i];
            if sizes[a] < 2 {
                continue;
            }
            let d = sq_dist(p, &centroids[a]);
            if d > pick_d {
                pick_d = d;
                pick = Some(i);
            }
        }
        let i = pick.expect("k <= n guarantees a donor cluster");
        sizes[assignments[i]] -= 1;
        assignments[i] = j;
        sizes[j] = 1;
        centroids[j] = points[i].clone();
    }
}

/// Runs Lloyd's algorithm until assignments stop changing or `max_iter` is hit.
pub fn lloyd(points: &[Vec<f64>], init: Vec<Vec<f64>>, max_iter: usize) -> LloydRun {
    let k = init.len();
    assert!(k >= 1 && k <= points.len() && max_iter >= 1);
    let mut centroids = init;
    let mut assignments: Vec<usize> = vec![usize::MAX; points.len()];
    let mut trace = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    while iterations < max_iter {
        iterations += 1;
        let mut next: Vec<usize> = points.iter().map(|p| nearest(p, &centroids)).collect();
        repair_empty(points, &mut next, &mut centroids);
        let changed = next != assignments;
        assignments = next;
        centroids = cluster_means(points, &assignments, k);
        trace.push(total_wss(points, &assignments, &centroids));
        if !changed {
            converged = true;
            break;
        }
    }
    LloydRun {
        assignments,
        centroids,
        wss_trace: trace,
        iterations,
        converged,
    }
}

/// k-means++ seeding. Falls back to uniform choice among unused points once
/// every remaining point coincides with a chosen center.
pub fn kmeans_plus_plus(points: &[Vec<f64>], k: usize, rng: &mut impl Rng) -> Vec<Vec<f64>> {
    let n = points.len();
    let mut chosen = vec![false; n];
    let first = rng.random_range(0..n);
    chosen[first] = true;
    let mut centers = vec![points[first].clone()];
    let mut d2: Vec<f64> = points.iter().map(|p| sq_dist(p, &centers[0])).collect();
    while centers.len() < k {
        let total: f64 = d2.iter().sum();
        let idx = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut pick = n - 1;
            for (i, &w) in d2.iter().enumerate() {
                if w <= 0.0 {
                    continue;
                }
                if target < w {
                    pick = i;
                    break;
                }
                target -= w;
                pick = i;
            }
            pick
        } else {
            let free: Vec<usize> = (0..n).filter(|&i| !chosen[i]).collect();
            free[rng.random_range(0..free.len())]
        };
        chosen[idx] = true;
        centers.push(points[idx].clone());
        for (w, p) in d2.iter_mut().zip(points) {
            *w = w.min(sq_dist(p, &points[idx]));
        }
    }
    centers
}

fn restart_rng(seed: u64, restart: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(restart as u64);
    rng
}

/// Best-of-`n_init` k-means. Deterministic for fixed inputs.
pub fn run_kmeans(data: &CaseDataset, config: &KMeansConfig) -> Result<KMeansResult, KMeansError> {
    let n = data.n_cases();
    let k = config.k;
    if k == 0 {
        return Err(KMeansError::InvalidK);
    }
    if config.n_init == 0 || config.max_iter == 0 {
        return Err(KMeansError::ConfigInvalid(
            "n_init and max_iter must be positive".into(),
        ));
    }
    data.require_cases(2)?;
    if k > n {
        return Err(KMeansError::KTooLarge { k, n });
    }

    let mut warnings = Vec::new();
    let scaling = config.scaled.then(|| ScalingParams::fit(data, true));
    let points: Vec<Vec<f64>> = match &scaling {
        Some(p) => {
            for j in p.constant_features() {
                warnings.push(format!(
                    "feature {:?} is constant and was scaled to 0",
                    data.feature_names()[j]
                ));
            }
            p.transform(data)?
        }
        None => data.rows().map(<[f64]>::to_vec).collect(),
    };

    let distinct = count_distinct(&points);
    if distinct < k {
        warnings.push(format!(
            "only {distinct} distinct case profiles for k = {k}; some clusters hold duplicate profiles"
        ));
    }

    let mut best: Option<(usize, LloydRun)> = None;
    let mut restart_wss = Vec::with_capacity(config.n_init);
    for r in 0..config.n_init {
        let mut rng = restart_rng(config.seed, r);
        let init = kmeans_plus_plus(&points, k, &mut rng);
        let run = lloyd(&points, init, config.max_iter);
        restart_wss.push(run.wss());
        let better = best.as_ref().is_none_or(|(_, b)| run.wss() < b.wss());
        if better {
            best = Some((r, run));
        }
    }
    let (best_restart, run) = best.expect("n_init >= 1");
    if !run.converged {
        warnings.push(format!(
            "best initialization did not converge within {} iterations",
            config.max_iter
        ));
    }

    let raw: Vec<Vec<f64>> = data.rows().map(<[f64]>::to_vec).collect();
    let centroids = cluster_means(&raw, &run.assignments, k);
    let mut cluster_sizes = vec![0usize; k];
    for &a in &run.assignments {
        cluster_sizes[a] += 1;
    }
    let ssb = between_scatter(&points, &run.assignments, k);
    let wss = run.wss();
    let pseudo_f = calinski_harabasz(ssb, wss, n, k);
    let silhouette = (k >= 2).then(|| silhouette_widths(&points, &run.assignments, k));

    Ok(KMeansResult {
        config: config.clone(),
        case_ids: data.case_ids().to_vec(),
        feature_names: data.feature_names().to_vec(),
        dataset_fingerprint: data.fingerprint(),
        scaling,
        centroids,
        global_mean: data.column_means(),
        assignments: run.assignments,
        cluster_sizes,
        wss,
        ssb,
        pseudo_f,
        silhouette,
        restart_wss,
        best_restart,
        iterations: run.iterations,
        warnings,
    })
}

fn count_distinct(points: &[Vec<f64>]) -> usize {
    let mut keys: Vec<Vec<u64>> = points
        .iter()
        .map(|p| p.iter().map(|v| v.to_bits()).collect())
        .collect();
    keys.sort_unstable();
    keys.dedup();
    keys.len()
}

fn between_scatter(points: &[Vec<f64>], assignments: &[usize], k: usize) -> f64 {
    let n = points.len() as f64;
    let m = points[0].len();
    let grand: Vec<f64> = (0..m)
        .map(|j| points.iter().map(|p| p[j]).sum::<f64>() / n)
        .collect();
    let means = cluster_means(points, assignments, k);
    let mut sizes = vec![0usize; k];
    for &a in assignments {
        sizes[a] += 1;
    }
    means
        .iter()
        .zip(&sizes)
        .map(|(c, &s)| s as f64 * sq_dist(c, &grand))
        .sum()
}

fn calinski_harabasz(ssb: f64, ssw: f64, n: usize, k: usize) -> Statistic {
    if k < 2 || k >= n {
        return Statistic::Undefined;
    }
    Statistic::ratio(ssb / (k - 1) as f64, ssw / (n - k) as f64)
}

fn silhouette_widths(points: &[Vec<f64>], assignments: &[usize], k: usize) -> Silhouette {
    let n = points.len();
    let mut sizes = vec![0usize; k];
    for &a in assignments {
        sizes[a] += 1;
    }
    let mut values = Vec::with_capacity(n);
    let mut sums = vec![0.0; k];
    for i in 0..n {
        let own = assignments[i];
        let mut totals = vec![0.0; k];
        for j in 0..n {
            if i != j {
                totals[assignments[j]] += dist(&points[i], &points[j]);
            }
        }
        let s = if sizes[own] <= 1 {
            0.0
        } else {
            let a = totals[own] / (sizes[own] - 1) as f64;
            let b = (0..k)
                .filter(|&c| c != own && sizes[c] > 0)
                .map(|c| totals[c] / sizes[c] as f64)
                .fold(f64::INFINITY, f64::min);
            let denom = a.max(b);
            if denom > 0.0 {
                ((b - a) / denom).clamp(-1.0, 1.0)
            } else {
                0.0
            }
        };
        sums[own] += s;
        values.push(s);
    }
    let cluster_means = sums
        .iter()
        .zip(&sizes)
        .map(|(s, &c)| if c > 0 { s / c as f64 } else { 0.0 })
        .collect();
    let overall = values.iter().sum::<f64>() / n as f64;
    Silhouette {
        values,
        cluster_means,
        overall,
    }
}

/// Calinski–Harabasz pseudo-F of a clustering, recomputed from the data.
///
/// Undefined for k = 1 and k = n.
pub fn pseudo_f(result: &KMeansResult, data: &CaseDataset) -> Result<Statistic, KMeansError> {
    let points = result.clustering_space(data)?;
    let k = result.k();
    let means = cluster_means(&points, &result.assignments, k);
    let ssw = total_wss(&points, &result.assignments, &means);
    let ssb = between_scatter(&points, &result.assignments, k);
    Ok(calinski_harabasz(ssb, ssw, points.len(), k))
}

/// Silhouette widths of a clustering, recomputed from the data.
pub fn silhouette(result: &KMeansResult, data: &CaseDataset) -> Result<Silhouette, KMeansError> {
    if result.k() < 2 {
        return Err(KMeansError::SilhouetteUndefined);
    }
    let points = result.clustering_space(data)?;
    Ok(silhouette_widths(&points, &result.assignments, result.k()))
}
