use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::Serialize;
use thiserror::Error;

use uttt_core::opening::ParseSequenceError;
use uttt_core::{IllegalMove, IllegalReason, OpeningClass};

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("invalid digits: {0}")]
    InvalidDigits(#[from] ParseSequenceError),
    #[error("digits are not a playable opening ({0})")]
    UnplayableDigits(OpeningClass),
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("no game with id {0}")]
    NotFound(String),
    #[error("stale version: expected {expected}, current {current}")]
    VersionConflict { expected: u64, current: u64 },
    #[error(transparent)]
    IllegalMove(#[from] IllegalMove),
    #[error("could not roll a playable opening: {0}")]
    RetriesExhausted(#[from] uttt_core::RetriesExhausted),
    #[error("persistence: {0}")]
    Persistence(#[from] std::io::Error),
}

/// Error body: a stable machine-readable `code` plus a human `message`.
#[derive(Debug, Serialize)]
pub struct ErrorBody {
    pub code: &'static str,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<IllegalReason>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub classification: Option<OpeningClass>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub current_version: Option<u64>,
}

impl ServiceError {
    pub fn code(&self) -> &'static str {
        match self {
            ServiceError::InvalidDigits(_) => "invalid_digits",
            ServiceError::UnplayableDigits(_) => "unplayable_digits",
            ServiceError::InvalidRequest(_) => "invalid_request",
            ServiceError::NotFound(_) => "not_found",
            ServiceError::VersionConflict { .. } => "version_conflict",
            ServiceError::IllegalMove(_) => "illegal_move",
            ServiceError::RetriesExhausted(_) => "retries_exhausted",
            ServiceError::Persistence(_) => "internal",
        }
    }

    pub fn status(&self) -> StatusCode {
        match self {
            ServiceError::InvalidDigits(_) | ServiceError::InvalidRequest(_) => {
                StatusCode::BAD_REQUEST
            }
            ServiceError::UnplayableDigits(_) | ServiceError::IllegalMove(_) => {
                StatusCode::UNPROCESSABLE_ENTITY
            }
            ServiceError::NotFound(_) => StatusCode::NOT_FOUND,
            ServiceError::VersionConflict { .. } => StatusCode::CONFLICT,
            ServiceError::RetriesExhausted(_) | ServiceError::Persistence(_) => {
                StatusCode::INTERNAL_SERVER_ERROR
            }
        }
    }

    pub fn body(&self) -> ErrorBody {
        ErrorBody {
            code: self.code(),
            message: self.to_string(),
            reason: match self {
                ServiceError::IllegalMove(e) => Some(e.reason),
                _ => None,
            },
            classification: match self {
                ServiceError::UnplayableDigits(c) => Some(*c),
                _ => None,
            },
            current_version: match self {
                ServiceError::VersionConflict { current, .. } => Some(*current),
                _ => None,
            },
        }
    }
}

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        if let ServiceError::Persistence(e) = &self {
            tracing::error!("persistence failure: {e}");
        }
        (self.status(), Json(self.body())).into_response()
    }
}
