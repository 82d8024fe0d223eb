//! Analysis session: the accumulated results of one upload → report pass.
//!
//! Stage prerequisites:
//!
//! | stage      | requires        |
//! |------------|-----------------|
//! | kmeans     | data            |
//! | som        | data            |
//! | scenario   | kmeans, som     |
//! | prediction | som             |
//!
//! Re-running a stage clears every stage that depends on it.

use std::collections::BTreeMap;
use std::fmt;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{CaseDataset, DataError};
use crate::kmeans::{run_kmeans, KMeansConfig, KMeansError, KMeansResult};
use crate::predict::{classify, PredictError, PredictionResult};
use crate::scenario::{
    self, ScenarioError, ScenarioRun, ScenarioState, SensitivityHistogram, SensitivitySpec,
};
use crate::som::{train_som, SomConfig, SomError, SomModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Data,
    Kmeans,
    Som,
    Scenario,
    Prediction,
}

impl Stage {
    pub const ALL: [Stage; 5] = [
        Stage::Data,
        Stage::Kmeans,
        Stage::Som,
        Stage::Scenario,
        Stage::Prediction,
    ];

    /// Stages that produce a report section.
    pub const REPORTED: [Stage; 4] = [Stage::Kmeans, Stage::Som, Stage::Scenario, Stage::Prediction];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Data => "data",
            Stage::Kmeans => "kmeans",
            Stage::Som => "som",
            Stage::Scenario => "scenario",
            Stage::Prediction => "prediction",
        }
    }

    fn bit(self) -> u8 {
        1 << (self as u8)
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Set of stages, serialized as a list of stage names.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "Vec<Stage>", into = "Vec<Stage>")]
pub struct StageSet(u8);

impl StageSet {
    pub fn empty() -> Self {
        Self(0)
    }

    pub fn insert(&mut self, stage: Stage) {
        self.0 |= stage.bit();
    }

    pub fn contains(self, stage: Stage) -> bool {
        self.0 & stage.bit() != 0
    }

    pub fn bits(self) -> u8 {
        self.0
    }

    pub fn iter(self) -> impl Iterator<Item = Stage> {
        Stage::ALL.into_iter().filter(move |s| self.contains(*s))
    }

    /// Restricted to the stages that yield report sections.
    pub fn reported(self) -> Self {
        Stage::REPORTED
            .into_iter()
            .filter(|s| self.contains(*s))
            .collect()
    }
}

impl FromIterator<Stage> for StageSet {
    fn from_iter<I: IntoIterator<Item = Stage>>(iter: I) -> Self {
        let mut s = StageSet::empty();
        for st in iter {
            s.insert(st);
        }
        s
    }
}

impl From<Vec<Stage>> for StageSet {
    fn from(v: Vec<Stage>) -> Self {
        v.into_iter().collect()
    }
}

impl From<StageSet> for Vec<Stage> {
    fn from(s: StageSet) -> Self {
        s.iter().collect()
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SessionError {
    #[error("stage {} requires {} to be run first", stage.name(), names(missing))]
    MissingStage { stage: Stage, missing: Vec<Stage> },
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    KMeans(#[from] KMeansError),
    #[error(transparent)]
    Som(#[from] SomError),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Predict(#[from] PredictError),
}

fn names(stages: &[Stage]) -> String {
    stages.iter().map(|s| s.name()).collect::<Vec<_>>().join(", ")
}

impl SessionError {
    pub fn code(&self) -> &'static str {
        match self {
            SessionError::MissingStage { .. } => "stage_order",
            SessionError::Data(e) => e.code(),
            SessionError::KMeans(e) => e.code(),
            SessionError::Som(e) => e.code(),
            SessionError::Scenario(e) => e.code(),
            SessionError::Predict(e) => e.code(),
        }
    }
}

/// Scenario tab state plus every intervention and sensitivity run since setup.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioRecord {
    pub state: ScenarioState,
    pub interventions: Vec<ScenarioRun>,
    pub sensitivity: Vec<SensitivityHistogram>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub input: CaseDataset,
    pub result: PredictionResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Session {
    pub id: String,
    pub created_at: DateTime<Utc>,
    pub last_used: DateTime<Utc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dataset: Option<CaseDataset>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kmeans: Option<KMeansResult>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub som: Option<SomModel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario: Option<ScenarioRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prediction: Option<PredictionRecord>,
}

impl Session {
    pub fn new(id: impl Into<String>) -> Self {
        let now = Utc::now();
        Self {
            id: id.into(),
            created_at: now,
            last_used: now,
            dataset: None,
            kmeans: None,
            som: None,
            scenario: None,
            prediction: None,
        }
    }

    pub fn touch(&mut self) {
        self.last_used = Utc::now();
    }

    /// Completion bitmap derived from which results are present.
    pub fn completed_stages(&self) -> StageSet {
        let mut s = StageSet::empty();
        if self.dataset.is_some() {
            s.insert(Stage::Data);
        }
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

    /// Prerequisites of `stage` that have not been run yet.
    pub fn missing_for(&self, stage: Stage) -> Vec<Stage> {
        let needs: &[Stage] = match stage {
            Stage::Data => &[],
            Stage::Kmeans | Stage::Som => &[Stage::Data],
            Stage::Scenario => &[Stage::Data, Stage::Kmeans, Stage::Som],
            Stage::Prediction => &[Stage::Data, Stage::Som],
        };
        let done = self.completed_stages();
        needs.iter().copied().filter(|s| !done.contains(*s)).collect()
    }

    pub fn require(&self, stage: Stage) -> Result<(), SessionError> {
        let missing = self.missing_for(stage);
        if missing.is_empty() {
            Ok(())
        } else {
            Err(SessionError::MissingStage { stage, missing })
        }
    }

    pub fn dataset(&self) -> Result<&CaseDataset, SessionError> {
        self.dataset.as_ref().ok_or(SessionError::MissingStage {
            stage: Stage::Data,
            missing: vec![Stage::Data],
        })
    }

    /// Replaces the dataset; every analysis stage is invalidated.
    pub fn load_data(&mut self, dataset: CaseDataset) {
        self.dataset = Some(dataset);
        self.kmeans = None;
        self.som = None;
        self.scenario = None;
        self.prediction = None;
    }

    pub fn run_kmeans(&mut self, config: &KMeansConfig) -> Result<&KMeansResult, SessionError> {
        self.require(Stage::Kmeans)?;
        let result = run_kmeans(self.dataset()?, config)?;
        self.scenario = None;
        Ok(self.kmeans.insert(result))
    }

    pub fn train_som(&mut self, config: &SomConfig) -> Result<&SomModel, SessionError> {
        self.require(Stage::Som)?;
        let model = train_som(self.dataset()?, config)?;
        self.scenario = None;
        self.prediction = None;
        Ok(self.som.insert(model))
    }

    /// (Re)initializes the scenario from the current clusters and map.
    pub fn setup_scenario(&mut self) -> Result<&ScenarioRecord, SessionError> {
        self.require(Stage::Scenario)?;
        let state = scenario::setup(self.som.as_ref().expect("checked"), self.kmeans.as_ref().expect("checked"))?;
        Ok(self.scenario.insert(ScenarioRecord {
            state,
            interventions: Vec::new(),
            sensitivity: Vec::new(),
        }))
    }

    /// Edits one cluster profile and re-maps it. Sets the scenario up first if needed.
    pub fn run_scenario(
        &mut self,
        cluster: usize,
        edits: &BTreeMap<String, f64>,
    ) -> Result<ScenarioRun, SessionError> {
        self.require(Stage::Scenario)?;
        if self.scenario.is_none() {
            self.setup_scenario()?;
        }
        let model = self.som.as_ref().expect("checked");
        let record = self.scenario.as_mut().expect("set up");
        let run = scenario::run_scenario(&mut record.state, model, cluster, edits)?;
        record.interventions.push(run.clone());
        Ok(run)
    }

    pub fn sensitivity(&mut self, spec: &SensitivitySpec) -> Result<SensitivityHistogram, SessionError> {
        self.require(Stage::Scenario)?;
        if self.scenario.is_none() {
            self.setup_scenario()?;
        }
        let model = self.som.as_ref().expect("checked");
        let record = self.scenario.as_mut().expect("set up");
        let hist = scenario::sensitivity(&record.state, model, spec)?;
        record.sensitivity.push(hist.clone());
        Ok(hist)
    }

    pub fn predict(&mut self, new_data: CaseDataset) -> Result<&PredictionRecord, SessionError> {
        self.require(Stage::Prediction)?;
        let result = classify(self.som.as_ref().expect("checked"), &new_data)?;
        Ok(self.prediction.insert(PredictionRecord {
            input: new_data,
            result,
        }))
    }
}
