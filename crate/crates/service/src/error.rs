use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use caseflow_core::{ReportError, SessionError, Stage};
use serde_json::json;

#[derive(Debug)]
pub enum ApiError {
    SessionNotFound(String),
    StageOrder { stage: Stage, missing: Vec<Stage> },
    /// Domain error passed through with the core error code.
    Domain { code: String, message: String },
    Internal(String),
}

impl ApiError {
    pub fn invalid(message: impl Into<String>) -> Self {
        ApiError::Domain {
            code: "invalid_request".into(),
            message: message.into(),
        }
    }

    pub fn domain(code: &str, message: impl ToString) -> Self {
        ApiError::Domain {
            code: code.into(),
            message: message.to_string(),
        }
    }
}

impl From<SessionError> for ApiError {
    fn from(e: SessionError) -> Self {
        match e {
            SessionError::MissingStage { stage, missing } => ApiError::StageOrder { stage, missing },
            other => ApiError::domain(other.code(), &other),
        }
    }
}

impl From<ReportError> for ApiError {
    fn from(e: ReportError) -> Self {
        ApiError::domain(e.code(), &e)
    }
}

impl From<std::io::Error> for ApiError {
    fn from(e: std::io::Error) -> Self {
        ApiError::Internal(e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (status, body) = match self {
            ApiError::SessionNotFound(id) => (
                StatusCode::NOT_FOUND,
                json!({"error": "session_not_found", "message": format!("no session {id}")}),
            ),
            ApiError::StageOrder { stage, missing } => {
                let names: Vec<&str> = missing.iter().map(|s| s.name()).collect();
                (
                    StatusCode::CONFLICT,
                    json!({
                        "error": "stage_order",
                        "stage": stage.name(),
                        "missing": names,
                        "message": format!("{} requires {} first", stage.name(), names.join(", ")),
                    }),
                )
            }
            ApiError::Domain { code, message } => (
                StatusCode::UNPROCESSABLE_ENTITY,
                json!({"error": code, "message": message}),
            ),
            ApiError::Internal(message) => (
                StatusCode::INTERNAL_SERVER_ERROR,
                json!({"error": "internal", "message": message}),
            ),
        };
        (status, Json(body)).into_response()
    }
}
