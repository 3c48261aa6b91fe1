use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use modelgate_core::StoreError;
use serde::{Deserialize, Serialize};

/// JSON error body: `{"code": ..., "message": ...}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApiError {
    #[serde(skip)]
    pub status: u16,
    pub code: String,
    pub message: String,
}

pub fn status_for(code: &str) -> StatusCode {
    match code {
        "unknown_entry" | "unknown_review" | "unknown_override" => StatusCode::NOT_FOUND,
        "duplicate_entry" | "illegal_transition" | "library_locked" | "read_only" => StatusCode::CONFLICT,
        "parse_error" | "invalid_entry_id" | "not_weak_attribute" | "not_medium_metric" | "empty_justification"
        | "empty_review_text" | "invalid_input" => StatusCode::UNPROCESSABLE_ENTITY,
        _ => StatusCode::INTERNAL_SERVER_ERROR,
    }
}

impl ApiError {
    pub fn new(code: &str, message: impl Into<String>) -> Self {
        Self { status: status_for(code).as_u16(), code: code.to_string(), message: message.into() }
    }

    pub fn invalid(message: impl Into<String>) -> Self {
        Self::new("invalid_input", message)
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Self::new("internal", message)
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        Self::new(e.code(), e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = StatusCode::from_u16(self.status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
        (status, Json(self)).into_response()
    }
}
