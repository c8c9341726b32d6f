//! HTTP routes.
//!
//! ```text
//! POST /games               {seed?} | {digits?} | empty
//! GET  /games/{id}
//! POST /games/{id}/moves    {field, spot, expected_version?}
//! POST /openings/roll       {seed?, allow_forced_win?} | empty
//! POST /openings/classify   {digits}
//! GET  /census
//! ```

use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::IntoResponse;
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::de::DeserializeOwned;
use tower_http::services::ServeDir;

use crate::error::ServiceError;
use crate::session::GameService;
use crate::wire::{ClassifyRequest, CreateGameRequest, MoveRequest, RollRequest};

type AppState = Arc<GameService>;

/// Empty bodies decode as the type's default.
fn parse_body<T: DeserializeOwned + Default>(body: &Bytes) -> Result<T, ServiceError> {
    if body.iter().all(u8::is_ascii_whitespace) {
        return Ok(T::default());
    }
    parse_required(body)
}

fn parse_required<T: DeserializeOwned>(body: &Bytes) -> Result<T, ServiceError> {
    serde_json::from_slice(body).map_err(|e| ServiceError::InvalidRequest(e.to_string()))
}

async fn create_game(
    State(svc): State<AppState>,
    body: Bytes,
) -> Result<impl IntoResponse, ServiceError> {
    let req: CreateGameRequest = parse_body(&body)?;
    Ok((StatusCode::CREATED, Json(svc.create_game(req)?)))
}

async fn get_game(
    State(svc): State<AppState>,
    Path(id): Path<String>,
) -> Result<impl IntoResponse, ServiceError> {
    Ok(Json(svc.get_game(&id)?))
}

async fn submit_move(
    State(svc): State<AppState>,
    Path(id): Path<String>,
    body: Bytes,
) -> Result<impl IntoResponse, ServiceError> {
    let req: MoveRequest = parse_required(&body)?;
    Ok(Json(svc.submit_move(&id, req)?))
}

async fn roll_opening(
    State(svc): State<AppState>,
    body: Bytes,
) -> Result<impl IntoResponse, ServiceError> {
    let req: RollRequest = parse_body(&body)?;
    Ok(Json(svc.roll_opening(req)?))
}

async fn classify_opening(
    State(svc): State<AppState>,
    body: Bytes,
) -> Result<impl IntoResponse, ServiceError> {
    let req: ClassifyRequest = parse_required(&body)?;
    Ok(Json(svc.classify_opening(req)?))
}

async fn get_census(State(svc): State<AppState>) -> impl IntoResponse {
    Json(svc.census())
}

async fn not_found() -> ServiceError {
    ServiceError::NotFound("route".into())
}

pub fn router(svc: Arc<GameService>, static_dir: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/games", post(create_game))
        .route("/games/{id}", get(get_game))
        .route("/games/{id}/moves", post(submit_move))
        .route("/openings/roll", post(roll_opening))
        .route("/openings/classify", post(classify_opening))
        .route("/census", get(get_census))
        .with_state(svc);
    match static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api.fallback(not_found),
    }
}
