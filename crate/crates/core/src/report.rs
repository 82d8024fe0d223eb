//! Exportable session report.
//!
//! A report carries one section per stage that has results in the session
//! and nothing else. It serializes to a versioned JSON bundle and to a zip
//! archive holding one CSV file per table.

use std::io::{Cursor, Write};

use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;
use zip::write::SimpleFileOptions;

use crate::data::{CaseDataset, ScalingParams};
use crate::kmeans::KMeansResult;
use crate::predict::Prediction;
use crate::scenario::{ScenarioRun, SensitivityHistogram};
use crate::session::{Session, Stage, StageSet};
use crate::som::{names_plot_data, quadrant_profiles, AnovaRow, NamesCell, QuadrantProfile, SomConfig, SomModel};
use crate::stats::Statistic;

pub const REPORT_VERSION: u32 = 1;
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("no analysis stage has been run; nothing to export")]
    NothingToExport,
    #[error("report document is malformed: {0}")]
    Malformed(String),
    #[error("unsupported report version {0}")]
    UnsupportedVersion(u32),
    #[error("failed to write archive: {0}")]
    Archive(String),
}

impl ReportError {
    pub fn code(&self) -> &'static str {
        match self {
            ReportError::NothingToExport => "nothing_to_export",
            ReportError::Malformed(_) => "malformed_report",
            ReportError::UnsupportedVersion(_) => "unsupported_version",
            ReportError::Archive(_) => "archive_error",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub timestamp: String,
    pub tool_version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dataset_fingerprint: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_cases: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub feature_names: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterProfile {
    pub cluster: usize,
    pub size: usize,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseCluster {
    pub case_id: String,
    pub cluster: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub silhouette: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SilhouetteSummary {
    pub cluster_means: Vec<f64>,
    pub overall: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KMeansSection {
    pub k: usize,
    pub seed: u64,
    pub n_init: usize,
    pub max_iter: usize,
    pub scaled: bool,
    pub feature_names: Vec<String>,
    pub profiles: Vec<ClusterProfile>,
    /// Reference row listed under the cluster profiles.
    pub global_mean: Vec<f64>,
    pub wss: f64,
    pub ssb: f64,
    pub pseudo_f: Statistic,
    pub assignments: Vec<CaseCluster>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub silhouette: Option<SilhouetteSummary>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseQuadrant {
    pub case_id: String,
    pub neuron: usize,
    pub row: usize,
    pub col: usize,
}

/// Tukey box-plot statistics for one feature within one neuron.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxplotStats {
    pub neuron: usize,
    pub feature: String,
    pub n: usize,
    pub min: f64,
    pub lower_hinge: f64,
    pub median: f64,
    pub upper_hinge: f64,
    pub max: f64,
    pub lower_whisker: f64,
    pub upper_whisker: f64,
    pub outliers: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SomSection {
    pub parameters: SomConfig,
    pub scaling: ScalingParams,
    pub feature_names: Vec<String>,
    pub anova: Vec<AnovaRow>,
    pub quantization_error: f64,
    pub topographic_error: f64,
    /// Raw-unit neuron profiles; `deviation` is the bar-plot source.
    pub quadrant_profiles: Vec<QuadrantProfile>,
    pub assignments: Vec<CaseQuadrant>,
    pub boxplot: Vec<BoxplotStats>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub names_plot: Option<Vec<NamesCell>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSection {
    pub feature_names: Vec<String>,
    pub base_profiles: Vec<Vec<f64>>,
    pub edited_profiles: Vec<Vec<f64>>,
    pub base_bmu: Vec<usize>,
    pub current_bmu: Vec<usize>,
    pub interventions: Vec<ScenarioRun>,
    pub sensitivity: Vec<SensitivityHistogram>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionSection {
    pub input: CaseDataset,
    pub predictions: Vec<Prediction>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionReport {
    pub report_version: u32,
    pub metadata: ReportMetadata,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kmeans: Option<KMeansSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub som: Option<SomSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario: Option<ScenarioSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prediction: Option<PredictionSection>,
}

impl SessionReport {
    /// Stages with a section in this report.
    pub fn sections(&self) -> StageSet {
        let mut s = StageSet::empty();
        if self.kmeans.is_some() {
            s.insert(Stage::Kmeans);
        }
        if self.som.is_some() {
            s.insert(Stage::Som);
        }
        if self.scenario.is_some() {
            s.insert(Stage::Scenario);
        }
        if self.prediction.is_some() {
            s.insert(Stage::Prediction);
        }
        s
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, ReportError> {
        let r: SessionReport =
            serde_json::from_str(text).map_err(|e| ReportError::Malformed(e.to_string()))?;
        if r.report_version != REPORT_VERSION {
            return Err(ReportError::UnsupportedVersion(r.report_version));
        }
        Ok(r)
    }

    /// Zip archive with one CSV per table.
    pub fn to_csv_archive(&self) -> Result<Vec<u8>, ReportError> {
        let tables = csv_tables(self);
        let mut zip = zip::ZipWriter::new(Cursor::new(Vec::new()));
        // fixed timestamps keep archives reproducible
        let opts = SimpleFileOptions::default()
            .compression_method(zip::CompressionMethod::Deflated)
            .last_modified_time(zip::DateTime::default());
        for (name, body) in tables {
            zip.start_file(name, opts)
                .map_err(|e| ReportError::Archive(e.to_string()))?;
            zip.write_all(body.as_bytes())
                .map_err(|e| ReportError::Archive(e.to_string()))?;
        }
        let cursor = zip.finish().map_err(|e| ReportError::Archive(e.to_string()))?;
        Ok(cursor.into_inner())
    }
}

/// Assembles the report for the session's current results.
pub fn generate_report(session: &Session) -> Result<SessionReport, ReportError> {
    generate_report_at(session, Utc::now())
}

pub fn generate_report_at(session: &Session, at: DateTime<Utc>) -> Result<SessionReport, ReportError> {
    if session.completed_stages().reported() == StageSet::empty() {
        return Err(ReportError::NothingToExport);
    }
    let data = session.dataset.as_ref();
    let metadata = ReportMetadata {
        timestamp: at.to_rfc3339_opts(SecondsFormat::Millis, true),
        tool_version: TOOL_VERSION.to_string(),
        dataset_fingerprint: data.map(CaseDataset::fingerprint),
        n_cases: data.map(CaseDataset::n_cases),
        feature_names: data.map(|d| d.feature_names().to_vec()),
    };
    let kmeans = session.kmeans.as_ref().map(kmeans_section);
    let som = session
        .som
        .as_ref()
        .map(|m| som_section(m, data, session.kmeans.as_ref()));
    let scenario = session.scenario.as_ref().map(|r| ScenarioSection {
        feature_names: r.state.feature_names.clone(),
        base_profiles: r.state.base_profiles.clone(),
        edited_profiles: r.state.edited_profiles.clone(),
        base_bmu: r.state.base_bmu.clone(),
        current_bmu: r.state.current_bmu.clone(),
        interventions: r.interventions.clone(),
        sensitivity: r.sensitivity.clone(),
    });
    let prediction = session.prediction.as_ref().map(|p| PredictionSection {
        input: p.input.clone(),
        predictions: p.result.predictions.clone(),
    });
    Ok(SessionReport {
        report_version: REPORT_VERSION,
        metadata,
        kmeans,
        som,
        scenario,
        prediction,
    })
}

fn kmeans_section(r: &KMeansResult) -> KMeansSection {
    let profiles = r
        .centroids
        .iter()
        .zip(&r.cluster_sizes)
        .enumerate()
        .map(|(cluster, (values, &size))| ClusterProfile {
            cluster,
            size,
            values: values.clone(),
        })
        .collect();
    let assignments = r
        .case_ids
        .iter()
        .zip(&r.assignments)
        .enumerate()
        .map(|(i, (id, &cluster))| CaseCluster {
            case_id: id.clone(),
            cluster,
            silhouette: r.silhouette.as_ref().map(|s| s.values[i]),
        })
        .collect();
    KMeansSection {
        k: r.config.k,
        seed: r.config.seed,
        n_init: r.config.n_init,
        max_iter: r.config.max_iter,
        scaled: r.config.scaled,
        feature_names: r.feature_names.clone(),
        profiles,
        global_mean: r.global_mean.clone(),
        wss: r.wss,
        ssb: r.ssb,
        pseudo_f: r.pseudo_f,
        assignments,
        silhouette: r.silhouette.as_ref().map(|s| SilhouetteSummary {
            cluster_means: s.cluster_means.clone(),
            overall: s.overall,
        }),
        warnings: r.warnings.clone(),
    }
}

fn som_section(m: &SomModel, data: Option<&CaseDataset>, kmeans: Option<&KMeansResult>) -> SomSection {
    let grid = m.grid();
    let assignments = m
        .case_ids
        .iter()
        .zip(&m.assignments)
        .map(|(id, &neuron)| {
            let (row, col) = grid.coords(neuron);
            CaseQuadrant {
                case_id: id.clone(),
                neuron,
                row,
                col,
            }
        })
        .collect();
    let boxplot = data
        .filter(|d| d.fingerprint() == m.dataset_fingerprint)
        .map(|d| boxplot_data(m, d))
        .unwrap_or_default();
    SomSection {
        parameters: m.config.clone(),
        scaling: m.scaling.clone(),
        feature_names: m.feature_names.clone(),
        anova: m.anova.clone(),
        quantization_error: m.quantization_error,
        topographic_error: m.topographic_error,
        quadrant_profiles: quadrant_profiles(m),
        assignments,
        boxplot,
        names_plot: kmeans.and_then(|k| names_plot_data(m, k).ok()),
        warnings: m.warnings.clone(),
    }
}

/// Box-plot statistics of the raw case values in every non-empty neuron.
pub fn boxplot_data(model: &SomModel, data: &CaseDataset) -> Vec<BoxplotStats> {
    let mut out = Vec::new();
    for neuron in 0..model.n_neurons() {
        let members: Vec<usize> = model
            .assignments
            .iter()
            .enumerate()
            .filter(|(_, &a)| a == neuron)
            .map(|(i, _)| i)
            .collect();
        if members.is_empty() {
            continue;
        }
        for (j, name) in model.feature_names.iter().enumerate() {
            let values: Vec<f64> = members.iter().map(|&i| data.row(i)[j]).collect();
            out.push(tukey_box(neuron, name, values));
        }
    }
    out
}

/// Tukey five-number summary with 1.5 × IQR whiskers.
pub fn tukey_box(neuron: usize, feature: &str, mut values: Vec<f64>) -> BoxplotStats {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    let at = |pos: f64| {
        // pos is a 1-based position that may fall halfway between two values
        let lo = pos.floor() as usize;
        let hi = pos.ceil() as usize;
        0.5 * (values[lo - 1] + values[hi - 1])
    };
    let depth_median = (n as f64 + 1.0) / 2.0;
    let depth_hinge = (depth_median.floor() + 1.0) / 2.0;
    let lower_hinge = at(depth_hinge);
    let median = at(depth_median);
    let upper_hinge = at(n as f64 + 1.0 - depth_hinge);
    let iqr = upper_hinge - lower_hinge;
    let lo_fence = lower_hinge - 1.5 * iqr;
    let hi_fence = upper_hinge + 1.5 * iqr;
    let inside: Vec<f64> = values
        .iter()
        .copied()
        .filter(|v| *v >= lo_fence && *v <= hi_fence)
        .collect();
    BoxplotStats {
        neuron,
        feature: feature.to_string(),
        n,
        min: values[0],
        lower_hinge,
        median,
        upper_hinge,
        max: values[n - 1],
        lower_whisker: inside.first().copied().unwrap_or(lower_hinge),
        upper_whisker: inside.last().copied().unwrap_or(upper_hinge),
        outliers: values
            .iter()
            .copied()
            .filter(|v| *v < lo_fence || *v > hi_fence)
            .collect(),
    }
}

struct Table {
    rows: Vec<Vec<String>>,
}

impl Table {
    fn new<S: ToString>(header: impl IntoIterator<Item = S>) -> Self {
        Self {
            rows: vec![header.into_iter().map(|h| h.to_string()).collect()],
        }
    }

    fn push<S: ToString>(&mut self, row: impl IntoIterator<Item = S>) {
        self.rows.push(row.into_iter().map(|c| c.to_string()).collect());
    }

    fn render(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.rows {
            w.write_record(r).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf8")
    }
}

fn with_features(prefix: &[&str], features: &[String]) -> Vec<String> {
    prefix
        .iter()
        .map(|s| s.to_string())
        .chain(features.iter().cloned())
        .collect()
}

fn fmt_vals(values: &[f64]) -> impl Iterator<Item = String> + '_ {
    values.iter().map(f64::to_string)
}

/// Every CSV table of the archive, as (file name, contents), in archive order.
pub fn csv_tables(report: &SessionReport) -> Vec<(String, String)> {
    let mut out: Vec<(String, String)> = Vec::new();
    let mut add = |name: &str, t: Table| out.push((name.to_string(), t.render()));

    let md = &report.metadata;
    let mut t = Table::new(["key", "value"]);
    t.push(["report_version", &report.report_version.to_string()]);
    t.push(["timestamp", &md.timestamp]);
    t.push(["tool_version", &md.tool_version]);
    if let Some(fp) = &md.dataset_fingerprint {
        t.push(["dataset_fingerprint", fp]);
    }
    let sections: Vec<&str> = report.sections().iter().map(Stage::name).collect();
    t.push(["sections".to_string(), sections.join(" ")]);
    add("metadata.csv", t);

    if let Some(k) = &report.kmeans {
        let mut t = Table::new(with_features(&["cluster", "size"], &k.feature_names));
        for p in &k.profiles {
            t.push([p.cluster.to_string(), p.size.to_string()].into_iter().chain(fmt_vals(&p.values)));
        }
        let n: usize = k.profiles.iter().map(|p| p.size).sum();
        t.push(["global_mean".to_string(), n.to_string()].into_iter().chain(fmt_vals(&k.global_mean)));
        add("kmeans_profiles.csv", t);

        let mut t = Table::new(["case_id", "cluster", "silhouette"]);
        for a in &k.assignments {
            t.push([
                a.case_id.clone(),
                a.cluster.to_string(),
                a.silhouette.map(|s| s.to_string()).unwrap_or_default(),
            ]);
        }
        add("kmeans_assignments.csv", t);

        let mut t = Table::new(["metric", "value"]);
        t.push(["k".to_string(), k.k.to_string()]);
        t.push(["seed".to_string(), k.seed.to_string()]);
        t.push(["n_init".to_string(), k.n_init.to_string()]);
        t.push(["scaled".to_string(), k.scaled.to_string()]);
        t.push(["wss".to_string(), k.wss.to_string()]);
        t.push(["ssb".to_string(), k.ssb.to_string()]);
        t.push(["pseudo_f".to_string(), k.pseudo_f.to_string()]);
        if let Some(s) = &k.silhouette {
            t.push(["silhouette_overall".to_string(), s.overall.to_string()]);
        }
        add("kmeans_summary.csv", t);

        if let Some(s) = &k.silhouette {
            let mut t = Table::new(["cluster", "size", "average_width"]);
            for (c, m) in s.cluster_means.iter().enumerate() {
                t.push([c.to_string(), k.profiles[c].size.to_string(), m.to_string()]);
            }
            t.push(["overall".to_string(), n.to_string(), s.overall.to_string()]);
            add("kmeans_silhouette.csv", t);
        }
    }

    if let Some(s) = &report.som {
        let p = &s.parameters;
        let mut t = Table::new(["parameter", "value"]);
        t.push(["grid_rows".to_string(), p.grid_rows.to_string()]);
        t.push(["grid_cols".to_string(), p.grid_cols.to_string()]);
        t.push([
            "iterations".to_string(),
            p.iterations.map(|i| i.to_string()).unwrap_or_default(),
        ]);
        t.push(["learning_rate".to_string(), p.learning_rate.to_string()]);
        t.push([
            "initial_radius".to_string(),
            p.initial_radius.map(|r| r.to_string()).unwrap_or_default(),
        ]);
        t.push(["seed".to_string(), p.seed.to_string()]);
        t.push(["scale_data".to_string(), p.scale_data.to_string()]);
        add("som_parameters.csv", t);

        let mut t = Table::new(["metric", "value"]);
        t.push(["quantization_error".to_string(), s.quantization_error.to_string()]);
        t.push(["topographic_error".to_string(), s.topographic_error.to_string()]);
        add("som_quality.csv", t);

        let mut t = Table::new(["feature", "F", "p", "df_between", "df_within"]);
        for a in &s.anova {
            t.push([
                a.feature.clone(),
                a.f.to_string(),
                a.p.to_string(),
                a.df_between.to_string(),
                a.df_within.to_string(),
            ]);
        }
        add("som_anova.csv", t);

        let mut t = Table::new(with_features(&["neuron", "row", "col", "case_count", "empty"], &s.feature_names));
        for q in &s.quadrant_profiles {
            t.push(
                [
                    q.neuron.to_string(),
                    q.row.to_string(),
                    q.col.to_string(),
                    q.case_count.to_string(),
                    q.empty.to_string(),
                ]
                .into_iter()
                .chain(fmt_vals(&q.weights)),
            );
        }
        add("som_quadrant_profiles.csv", t);

        let mut t = Table::new(["neuron", "row", "col", "feature", "deviation", "empty"]);
        for q in &s.quadrant_profiles {
            for (f, d) in s.feature_names.iter().zip(&q.deviation) {
                t.push([
                    q.neuron.to_string(),
                    q.row.to_string(),
                    q.col.to_string(),
                    f.clone(),
                    d.to_string(),
                    q.empty.to_string(),
                ]);
            }
        }
        add("som_barplot.csv", t);

        let mut t = Table::new([
            "neuron",
            "feature",
            "n",
            "min",
            "lower_hinge",
            "median",
            "upper_hinge",
            "max",
            "lower_whisker",
            "upper_whisker",
            "outliers",
        ]);
        for b in &s.boxplot {
            t.push([
                b.neuron.to_string(),
                b.feature.clone(),
                b.n.to_string(),
                b.min.to_string(),
                b.lower_hinge.to_string(),
                b.median.to_string(),
                b.upper_hinge.to_string(),
                b.max.to_string(),
                b.lower_whisker.to_string(),
                b.upper_whisker.to_string(),
                b.outliers.iter().map(f64::to_string).collect::<Vec<_>>().join(" "),
            ]);
        }
        add("som_boxplot.csv", t);

        let mut t = Table::new(["case_id", "neuron", "row", "col"]);
        for a in &s.assignments {
            t.push([a.case_id.clone(), a.neuron.to_string(), a.row.to_string(), a.col.to_string()]);
        }
        add("som_assignments.csv", t);

        if let Some(cells) = &s.names_plot {
            let mut t = Table::new(["neuron", "row", "col", "label"]);
            for c in cells {
                for l in &c.labels {
                    t.push([c.neuron.to_string(), c.row.to_string(), c.col.to_string(), l.clone()]);
                }
            }
            add("som_names_plot.csv", t);
        }
    }

    if let Some(s) = &report.scenario {
        let mut t = Table::new(with_features(&["cluster", "profile", "bmu"], &s.feature_names));
        for c in 0..s.base_profiles.len() {
            t.push(
                [c.to_string(), "base".to_string(), s.base_bmu[c].to_string()]
                    .into_iter()
                    .chain(fmt_vals(&s.base_profiles[c])),
            );
            t.push(
                [c.to_string(), "edited".to_string(), s.current_bmu[c].to_string()]
                    .into_iter()
                    .chain(fmt_vals(&s.edited_profiles[c])),
            );
        }
        add("scenario_profiles.csv", t);

        let mut t = Table::new([
            "run",
            "cluster",
            "feature",
            "value",
            "old_bmu",
            "previous_bmu",
            "new_bmu",
            "moved",
        ]);
        for (i, r) in s.interventions.iter().enumerate() {
            let tail = [
                r.old_bmu.to_string(),
                r.previous_bmu.to_string(),
                r.new_bmu.to_string(),
                r.moved.to_string(),
            ];
            if r.edits.is_empty() {
                t.push(
                    [i.to_string(), r.cluster.to_string(), String::new(), String::new()]
                        .into_iter()
                        .chain(tail.iter().cloned()),
                );
            }
            for (f, v) in &r.edits {
                t.push(
                    [i.to_string(), r.cluster.to_string(), f.clone(), v.to_string()]
                        .into_iter()
                        .chain(tail.iter().cloned()),
                );
            }
        }
        add("scenario_interventions.csv", t);

        let mut t = Table::new(["analysis", "cluster", "seed", "n_samples", "neuron", "count"]);
        for (i, h) in s.sensitivity.iter().enumerate() {
            for (neuron, count) in &h.counts {
                t.push([
                    i.to_string(),
                    h.cluster.to_string(),
                    h.seed.to_string(),
                    h.n_samples.to_string(),
                    neuron.to_string(),
                    count.to_string(),
                ]);
            }
        }
        add("scenario_sensitivity.csv", t);

        let mut t = Table::new(["analysis", "feature", "deviation"]);
        for (i, h) in s.sensitivity.iter().enumerate() {
            for (f, d) in &h.deviation {
                t.push([i.to_string(), f.clone(), d.to_string()]);
            }
        }
        add("scenario_sensitivity_deviation.csv", t);
    }

    if let Some(p) = &report.prediction {
        out.push(("prediction_input.csv".to_string(), p.input.to_csv(',')));
        let mut t = Table::new(["case_id", "best", "second", "best_distance", "second_distance"]);
        for r in &p.predictions {
            t.push([
                r.case_id.clone(),
                r.best.to_string(),
                r.second.to_string(),
                r.best_distance.to_string(),
                r.second_distance.to_string(),
            ]);
        }
        out.push(("prediction_results.csv".to_string(), t.render()));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fresh_session_has_nothing_to_export() {
        let s = Session::new("x");
        assert!(matches!(generate_report(&s), Err(ReportError::NothingToExport)));
    }

    #[test]
    fn tukey_hinges_match_fivenum() {
        // R: fivenum(c(1, 2, 3, 4, 5, 6, 100)) = 1 2.5 4 5.5 100
        let b = tukey_box(0, "x", vec![100.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        assert_eq!(
            (b.min, b.lower_hinge, b.median, b.upper_hinge, b.max),
            (1.0, 2.5, 4.0, 5.5, 100.0)
        );
        assert_eq!(b.outliers, [100.0]);
        assert_eq!(b.upper_whisker, 6.0);
        // fivenum(c(1, 2, 3, 4)) = 1 1.5 2.5 3.5 4
        let b = tukey_box(0, "x", vec![4.0, 3.0, 2.0, 1.0]);
        assert_eq!((b.lower_hinge, b.median, b.upper_hinge), (1.5, 2.5, 3.5));
        let b = tukey_box(0, "x", vec![7.0]);
        assert_eq!((b.min, b.median, b.max), (7.0, 7.0, 7.0));
    }
}
