//! `/v1` routes.

use std::collections::BTreeMap;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{DefaultBodyLimit, Path, Query, State};
use axum::http::{header, HeaderValue, Method, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use caseflow_core::report::{boxplot_data, BoxplotStats};
use caseflow_core::som::{names_plot_data, quadrant_profiles, AnovaRow, NamesCell, QuadrantProfile};
use caseflow_core::{
    generate_report, parse_csv, CaseDataset, IdColumn, KMeansConfig, KMeansResult,
    ParseOptions, PredictionResult, ScenarioRun, ScenarioState, SensitivityHistogram,
    SensitivitySpec, Session, SomConfig, Stage, StageSet,
};
use chrono::{DateTime, Utc};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use tower_http::cors::{AllowOrigin, Any, CorsLayer};
use tower_http::trace::TraceLayer;

use crate::error::ApiError;
use crate::store::SessionStore;

const MAX_UPLOAD_BYTES: usize = 64 * 1024 * 1024;
const DEFAULT_PREVIEW_ROWS: usize = 10;

type AppState = Arc<SessionStore>;
type ApiResult<T> = Result<T, ApiError>;

pub fn router(store: Arc<SessionStore>, cors_origins: &[String]) -> Router {
    let sessions = Router::new()
        .route("/", post(create_session))
        .route("/{id}", get(session_summary).delete(delete_session))
        .route("/{id}/data", post(upload_data))
        .route("/{id}/kmeans", post(run_kmeans).get(get_kmeans))
        .route("/{id}/kmeans/silhouette", get(get_silhouette))
        .route("/{id}/som", post(train_som).get(get_som))
        .route("/{id}/som/profiles", get(get_profiles))
        .route("/{id}/som/names-plot", get(get_names_plot))
        .route("/{id}/som/boxplot", get(get_boxplot))
        .route("/{id}/scenario", get(get_scenario))
        .route("/{id}/scenario/setup", post(setup_scenario))
        .route("/{id}/scenario/run", post(run_scenario))
        .route("/{id}/scenario/sensitivity", post(run_sensitivity))
        .route("/{id}/predict", post(predict))
        .route("/{id}/report", get(report));
    let v1 = Router::new()
        .route("/health", get(health))
        .nest("/sessions", sessions);
    let mut app = Router::new()
        .nest("/v1", v1)
        .layer(DefaultBodyLimit::max(MAX_UPLOAD_BYTES))
        .layer(TraceLayer::new_for_http())
        .with_state(store);
    if let Some(cors) = cors_layer(cors_origins) {
        app = app.layer(cors);
    }
    app
}

fn cors_layer(origins: &[String]) -> Option<CorsLayer> {
    if origins.is_empty() {
        return None;
    }
    let allow = if origins.iter().any(|o| o == "*") {
        AllowOrigin::from(Any)
    } else {
        let values: Vec<HeaderValue> = origins.iter().filter_map(|o| o.parse().ok()).collect();
        AllowOrigin::list(values)
    };
    Some(
        CorsLayer::new()
            .allow_origin(allow)
            .allow_methods([Method::GET, Method::POST, Method::DELETE])
            .allow_headers([header::CONTENT_TYPE]),
    )
}

async fn mutate<T, F>(store: &AppState, id: &str, f: F) -> ApiResult<T>
where
    F: FnOnce(&mut Session) -> ApiResult<T> + Send + 'static,
    T: Send + 'static,
{
    let shared = store
        .get(id)
        .ok_or_else(|| ApiError::SessionNotFound(id.to_string()))?;
    // the owned guard serializes writers for the whole (blocking) computation
    let mut guard = shared.write_owned().await;
    let store = store.clone();
    tokio::task::spawn_blocking(move || {
        let out = f(&mut guard)?;
        guard.touch();
        store.persist(&guard)?;
        Ok(out)
    })
    .await
    .map_err(|e| ApiError::Internal(e.to_string()))?
}

async fn read<T>(store: &AppState, id: &str, f: impl FnOnce(&Session) -> ApiResult<T>) -> ApiResult<T> {
    let shared = store
        .get(id)
        .ok_or_else(|| ApiError::SessionNotFound(id.to_string()))?;
    let guard = shared.read().await;
    f(&guard)
}

fn parse_json<T: DeserializeOwned>(body: &Bytes) -> ApiResult<T> {
    let text: &[u8] = if body.iter().all(u8::is_ascii_whitespace) { b"{}" } else { body };
    serde_json::from_slice(text).map_err(|e| ApiError::invalid(format!("invalid request body: {e}")))
}

fn absent(stage: Stage) -> ApiError {
    ApiError::StageOrder {
        stage,
        missing: vec![stage],
    }
}

#[derive(Debug, Serialize)]
struct Health {
    status: &'static str,
    version: &'static str,
}

async fn health() -> Json<Health> {
    Json(Health {
        status: "ok",
        version: env!("CARGO_PKG_VERSION"),
    })
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Created {
    pub session_id: String,
    pub created_at: DateTime<Utc>,
}

async fn create_session(State(store): State<AppState>) -> ApiResult<(StatusCode, Json<Created>)> {
    let s = tokio::task::spawn_blocking(move || store.create())
        .await
        .map_err(|e| ApiError::Internal(e.to_string()))??;
    Ok((
        StatusCode::CREATED,
        Json(Created {
            session_id: s.id,
            created_at: s.created_at,
        }),
    ))
}

async fn delete_session(State(store): State<AppState>, Path(id): Path<String>) -> ApiResult<StatusCode> {
    if store.remove(&id) {
        Ok(StatusCode::NO_CONTENT)
    } else {
        Err(ApiError::SessionNotFound(id))
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub n_cases: usize,
    pub n_features: usize,
    pub feature_names: Vec<String>,
    pub fingerprint: String,
    pub preview: Vec<PreviewRow>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct PreviewRow {
    pub case_id: String,
    pub values: Vec<f64>,
}

impl DatasetSummary {
    fn of(data: &CaseDataset, preview: usize) -> Self {
        Self {
            n_cases: data.n_cases(),
            n_features: data.n_features(),
            feature_names: data.feature_names().to_vec(),
            fingerprint: data.fingerprint(),
            preview: data
                .case_ids()
                .iter()
                .zip(data.rows())
                .take(preview)
                .map(|(id, r)| PreviewRow {
                    case_id: id.clone(),
                    values: r.to_vec(),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SessionSummary {
    pub session_id: String,
    pub created_at: DateTime<Utc>,
    pub last_used: DateTime<Utc>,
    pub completed_stages: StageSet,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dataset: Option<DatasetSummary>,
}

async fn session_summary(State(store): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<SessionSummary>> {
    read(&store, &id, |s| {
        Ok(Json(SessionSummary {
            session_id: s.id.clone(),
            created_at: s.created_at,
            last_used: s.last_used,
            completed_stages: s.completed_stages(),
            dataset: s.dataset.as_ref().map(|d| DatasetSummary::of(d, 0)),
        }))
    })
    .await
}

/// Query options for CSV uploads.
#[derive(Debug, Default, Deserialize)]
pub struct CsvQuery {
    pub header: Option<bool>,
    /// A single character, or one of `comma`, `semicolon`, `tab`.
    pub separator: Option<String>,
    pub id_column: Option<String>,
    pub id_index: Option<usize>,
    pub preview: Option<usize>,
}

impl CsvQuery {
    fn options(&self) -> ApiResult<ParseOptions> {
        let mut opts = ParseOptions::default();
        if let Some(h) = self.header {
            opts.has_header = h;
        }
        if let Some(sep) = &self.separator {
            opts.separator = match sep.as_str() {
                "comma" => ',',
                "semicolon" => ';',
                "tab" | "\\t" => '\t',
                s if s.chars().count() == 1 => s.chars().next().expect("one char"),
                other => return Err(ApiError::invalid(format!("unsupported separator {other:?}"))),
            };
        }
        opts.id_column = match (&self.id_column, self.id_index) {
            (Some(_), Some(_)) => {
                return Err(ApiError::invalid("give id_column or id_index, not both"))
            }
            (Some(name), None) => Some(IdColumn::Name(name.clone())),
            (None, Some(i)) => Some(IdColumn::Index(i)),
            (None, None) => None,
        };
        Ok(opts)
    }

    fn parse(&self, body: &Bytes) -> ApiResult<CaseDataset> {
        let opts = self.options()?;
        parse_csv(body, &opts).map_err(|e| ApiError::domain(e.code(), &e))
    }
}

async fn upload_data(
    State(store): State<AppState>,
    Path(id): Path<String>,
    Query(q): Query<CsvQuery>,
    body: Bytes,
) -> ApiResult<Json<DatasetSummary>> {
    let data = q.parse(&body)?;
    let preview = q.preview.unwrap_or(DEFAULT_PREVIEW_ROWS);
    mutate(&store, &id, move |s| {
        let summary = DatasetSummary::of(&data, preview);
        s.load_data(data);
        Ok(Json(summary))
    })
    .await
}

async fn run_kmeans(State(store): State<AppState>, Path(id): Path<String>, body: Bytes) -> ApiResult<Json<KMeansResult>> {
    let cfg: KMeansConfig = parse_json(&body)?;
    mutate(&store, &id, move |s| Ok(Json(s.run_kmeans(&cfg)?.clone()))).await
}

async fn get_kmeans(State(store): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<KMeansResult>> {
    read(&store, &id, |s| s.kmeans.clone().map(Json).ok_or_else(|| absent(Stage::Kmeans))).await
}

#[derive(Debug, Serialize, Deserialize)]
pub struct CaseWidth {
    pub case_id: String,
    pub cluster: usize,
    pub width: f64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SilhouetteView {
    pub cases: Vec<CaseWidth>,
    pub cluster_means: Vec<f64>,
    pub overall: f64,
}

async fn get_silhouette(State(store): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<SilhouetteView>> {
    read(&store, &id, |s| {
        let km = s.kmeans.as_ref().ok_or_else(|| absent(Stage::Kmeans))?;
        let sil = km.silhouette.as_ref().ok_or_else(|| {
            ApiError::domain(
                "silhouette_undefined",
                format!("silhouette needs 2 <= k < n (k = {}, n = {})", km.k(), km.assignments.len()),
            )
        })?;
        Ok(Json(SilhouetteView {
            cases: km
                .case_ids
                .iter()
                .zip(&km.assignments)
                .zip(&sil.values)
                .map(|((id, &cluster), &width)| CaseWidth {
                    case_id: id.clone(),
                    cluster,
                    width,
                })
                .collect(),
            cluster_means: sil.cluster_means.clone(),
            overall: sil.overall,
        }))
    })
    .await
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SomSummary {
    pub config: SomConfig,
    pub feature_names: Vec<String>,
    pub quantization_error: f64,
    pub topographic_error: f64,
    pub anova: Vec<AnovaRow>,
    pub assignments: Vec<usize>,
    pub case_counts: Vec<usize>,
    pub warnings: Vec<String>,
}

async fn train_som(State(store): State<AppState>, Path(id): Path<String>, body: Bytes) -> ApiResult<Json<SomSummary>> {
    let cfg: SomConfig = parse_json(&body)?;
    mutate(&store, &id, move |s| {
        let m = s.train_som(&cfg)?;
        Ok(Json(SomSummary {
            config: m.config.clone(),
            feature_names: m.feature_names.clone(),
            quantization_error: m.quantization_error,
            topographic_error: m.topographic_error,
            anova: m.anova.clone(),
            assignments: m.assignments.clone(),
            case_counts: m.case_counts(),
            warnings: m.warnings.clone(),
        }))
    })
    .await
}

/// The full trained model in its versioned serialization.
async fn get_som(State(store): State<AppState>, Path(id): Path<String>) -> ApiResult<Response> {
    read(&store, &id, |s| {
        let m = s.som.as_ref().ok_or_else(|| absent(Stage::Som))?;
        Ok(([(header::CONTENT_TYPE, "application/json")], m.to_json()).into_response())
    })
    .await
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ProfilesView {
    pub grid_rows: usize,
    pub grid_cols: usize,
    pub feature_names: Vec<String>,
    pub global_mean: Vec<f64>,
    pub quadrants: Vec<QuadrantProfile>,
}

async fn get_profiles(State(store): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<ProfilesView>> {
    read(&store, &id, |s| {
        let m = s.som.as_ref().ok_or_else(|| absent(Stage::Som))?;
        Ok(Json(ProfilesView {
            grid_rows: m.config.grid_rows,
            grid_cols: m.config.grid_cols,
            feature_names: m.feature_names.clone(),
            global_mean: m.scaling.mean.clone(),
            quadrants: quadrant_profiles(m),
        }))
    })
    .await
}

#[derive(Debug, Serialize, Deserialize)]
pub struct NamesPlotView {
    pub grid_rows: usize,
    pub grid_cols: usize,
    pub cells: Vec<NamesCell>,
}

async fn get_names_plot(State(store): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<NamesPlotView>> {
    read(&store, &id, |s| {
        let missing: Vec<Stage> = [(Stage::Kmeans, s.kmeans.is_none()), (Stage::Som, s.som.is_none())]
            .into_iter()
            .filter(|(_, gone)| *gone)
            .map(|(st, _)| st)
            .collect();
        if !missing.is_empty() {
            return Err(ApiError::StageOrder {
                stage: Stage::Som,
                missing,
            });
        }
        let (m, km) = (s.som.as_ref().expect("checked"), s.kmeans.as_ref().expect("checked"));
        let cells = names_plot_data(m, km).map_err(|e| ApiError::domain(e.code(), &e))?;
        Ok(Json(NamesPlotView {
            grid_rows: m.config.grid_rows,
            grid_cols: m.config.grid_cols,
            cells,
        }))
    })
    .await
}

async fn get_boxplot(State(store): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<Vec<BoxplotStats>>> {
    read(&store, &id, |s| {
        let m = s.som.as_ref().ok_or_else(|| absent(Stage::Som))?;
        Ok(Json(boxplot_data(m, s.dataset()?)))
    })
    .await
}

async fn get_scenario(State(store): State<AppState>, Path(id): Path<String>) -> ApiResult<Response> {
    read(&store, &id, |s| {
        s.require(Stage::Scenario)?;
        let rec = s.scenario.as_ref().ok_or_else(|| absent(Stage::Scenario))?;
        Ok(Json(rec).into_response())
    })
    .await
}

async fn setup_scenario(State(store): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<ScenarioState>> {
    mutate(&store, &id, |s| Ok(Json(s.setup_scenario()?.state.clone()))).await
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunRequest {
    pub cluster: usize,
    #[serde(default)]
    pub edits: BTreeMap<String, f64>,
}

async fn run_scenario(State(store): State<AppState>, Path(id): Path<String>, body: Bytes) -> ApiResult<Json<ScenarioRun>> {
    let req: RunRequest = parse_json(&body)?;
    mutate(&store, &id, move |s| Ok(Json(s.run_scenario(req.cluster, &req.edits)?))).await
}

async fn run_sensitivity(
    State(store): State<AppState>,
    Path(id): Path<String>,
    body: Bytes,
) -> ApiResult<Json<SensitivityHistogram>> {
    let spec: SensitivitySpec = parse_json(&body)?;
    mutate(&store, &id, move |s| Ok(Json(s.sensitivity(&spec)?))).await
}

async fn predict(
    State(store): State<AppState>,
    Path(id): Path<String>,
    Query(q): Query<CsvQuery>,
    body: Bytes,
) -> ApiResult<Json<PredictionResult>> {
    let data = q.parse(&body)?;
    mutate(&store, &id, move |s| Ok(Json(s.predict(data)?.result.clone()))).await
}

#[derive(Debug, Default, Deserialize)]
pub struct ReportQuery {
    pub format: Option<String>,
}

async fn report(
    State(store): State<AppState>,
    Path(id): Path<String>,
    Query(q): Query<ReportQuery>,
) -> ApiResult<Response> {
    let format = q.format.unwrap_or_else(|| "json".into());
    if format != "json" && format != "zip" {
        return Err(ApiError::invalid(format!("unknown report format {format:?}")));
    }
    let report = read(&store, &id, |s| Ok(generate_report(s)?)).await?;
    if format == "json" {
        return Ok(([(header::CONTENT_TYPE, "application/json")], report.to_json()).into_response());
    }
    let bytes = report.to_csv_archive()?;
    Ok((
        [
            (header::CONTENT_TYPE, "application/zip".to_string()),
            (
                header::CONTENT_DISPOSITION,
                format!("attachment; filename=\"caseflow-{id}.zip\""),
            ),
        ],
        bytes,
    )
        .into_response())
}
