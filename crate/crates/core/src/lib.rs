//! Case-based modeling workbench: cluster cases with k-means, corroborate the
//! clusters with a self-organizing map, simulate interventions on cluster
//! profiles, classify new cases and export session reports.

pub mod data;
pub mod kmeans;
pub mod predict;
pub mod report;
pub mod scenario;
pub mod session;
pub mod som;
pub mod stats;

pub use data::{parse_csv, CaseDataset, DataError, IdColumn, ParseOptions, ScalingParams};
pub use kmeans::{run_kmeans, KMeansConfig, KMeansError, KMeansResult, Silhouette};
pub use predict::{classify, validate_schema, PredictError, Prediction, PredictionResult, SchemaError};
pub use report::{generate_report, generate_report_at, ReportError, SessionReport};
pub use scenario::{ScenarioError, ScenarioRun, ScenarioState, SensitivityHistogram, SensitivitySpec};
pub use session::{Session, SessionError, Stage, StageSet};
pub use som::{best_matching_unit, train_som, BmuMatch, SomConfig, SomError, SomModel};
pub use stats::Statistic;
