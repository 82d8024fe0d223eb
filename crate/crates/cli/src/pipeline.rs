//! Batch pipeline: load, analyse, and write the report bundle.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use caseflow_core::{
    generate_report_at, parse_csv, CaseDataset, IdColumn, KMeansConfig, ParseOptions,
    SensitivitySpec, Session, SessionError, SomConfig,
};
use chrono::{DateTime, Utc};
use serde::Deserialize;
use thiserror::Error;

use crate::plots;

/// Exit codes are part of the CLI contract.
pub mod exit {
    pub const OK: u8 = 0;
    pub const USAGE: u8 = 2;
    pub const INPUT: u8 = 3;
    pub const DATA: u8 = 4;
    pub const ANALYSIS: u8 = 5;
    pub const OUTPUT: u8 = 6;
    pub const SERVER: u8 = 7;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("cannot read {path}: {source}")]
    Input {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Data { path: PathBuf, message: String },
    #[error("{0}")]
    Analysis(#[from] SessionError),
    #[error("report: {0}")]
    Report(#[from] caseflow_core::ReportError),
    #[error("cannot write {path}: {source}")]
    Output {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("server: {0}")]
    Server(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => exit::USAGE,
            CliError::Input { .. } => exit::INPUT,
            CliError::Data { .. } => exit::DATA,
            CliError::Analysis(_) | CliError::Report(_) => exit::ANALYSIS,
            CliError::Output { .. } => exit::OUTPUT,
            CliError::Server(_) => exit::SERVER,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CsvOptions {
    pub header: Option<bool>,
    pub separator: Option<char>,
    pub id_column: Option<String>,
}

impl CsvOptions {
    fn parse_options(&self) -> ParseOptions {
        let mut o = ParseOptions::default();
        if let Some(h) = self.header {
            o.has_header = h;
        }
        if let Some(s) = self.separator {
            o.separator = s;
        }
        o.id_column = self.id_column.clone().map(IdColumn::Name);
        o
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Intervention {
    pub cluster: usize,
    #[serde(default)]
    pub edits: BTreeMap<String, f64>,
}

/// Everything a run needs; loadable from TOML and overridable by flags.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub data: Option<PathBuf>,
    pub out: Option<PathBuf>,
    /// When set, replaces the seed of every stage.
    pub seed: Option<u64>,
    pub csv: CsvOptions,
    pub kmeans: Option<KMeansConfig>,
    pub som: Option<SomConfig>,
    pub intervention: Vec<Intervention>,
    pub sensitivity: Vec<SensitivitySpec>,
    pub predict: Option<PathBuf>,
    /// Fixed report timestamp; the current time when unset.
    pub timestamp: Option<DateTime<Utc>>,
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Input {
            path: path.to_path_buf(),
            source,
        })?;
        toml::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub out_dir: PathBuf,
    pub files: Vec<PathBuf>,
}

fn read_csv(path: &Path, csv: &CsvOptions) -> Result<CaseDataset, CliError> {
    let raw = std::fs::read(path).map_err(|source| CliError::Input {
        path: path.to_path_buf(),
        source,
    })?;
    parse_csv(&raw, &csv.parse_options()).map_err(|e| CliError::Data {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

/// Runs the configured stages in dependency order and writes the bundle.
pub fn run(cfg: &RunConfig) -> Result<RunOutput, CliError> {
    let data_path = cfg
        .data
        .as_ref()
        .ok_or_else(|| CliError::Usage("no input data given (--data)".into()))?;
    let out_dir = cfg.out.clone().unwrap_or_else(|| PathBuf::from("caseflow-out"));
    let data = read_csv(data_path, &cfg.csv)?;
    let predict_data = match &cfg.predict {
        Some(p) => Some(read_csv(p, &cfg.csv)?),
        None => None,
    };

    let mut session = Session::new("cli");
    session.load_data(data);
    if let Some(k) = &cfg.kmeans {
        let mut k = k.clone();
        if let Some(seed) = cfg.seed {
            k.seed = seed;
        }
        session.run_kmeans(&k)?;
    }
    if let Some(s) = &cfg.som {
        let mut s = s.clone();
        if let Some(seed) = cfg.seed {
            s.seed = seed;
        }
        session.train_som(&s)?;
    }
    if !cfg.intervention.is_empty() || !cfg.sensitivity.is_empty() {
        session.setup_scenario()?;
    }
    for i in &cfg.intervention {
        session.run_scenario(i.cluster, &i.edits)?;
    }
    for spec in &cfg.sensitivity {
        let mut spec = spec.clone();
        if let Some(seed) = cfg.seed {
            spec.seed = seed;
        }
        session.sensitivity(&spec)?;
    }
    if let Some(new) = predict_data {
        session.predict(new)?;
    }

    let report = generate_report_at(&session, cfg.timestamp.unwrap_or_else(Utc::now))?;
    let mut files = Vec::new();
    let mut write = |name: &str, bytes: &[u8]| -> Result<(), CliError> {
        let path = out_dir.join(name);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).map_err(|source| CliError::Output {
                path: parent.to_path_buf(),
                source,
            })?;
        }
        std::fs::write(&path, bytes).map_err(|source| CliError::Output {
            path: path.clone(),
            source,
        })?;
        files.push(path);
        Ok(())
    };
    write("report.json", report.to_json().as_bytes())?;
    write("report.zip", &report.to_csv_archive()?)?;
    if let Some(model) = &session.som {
        write("som_model.json", model.to_json().as_bytes())?;
    }
    for (name, svg) in plots::render_all(&report) {
        write(&format!("plots/{name}"), svg.as_bytes())?;
    }
    Ok(RunOutput { out_dir, files })
}
