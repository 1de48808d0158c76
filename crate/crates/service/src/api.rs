//! HTTP routes.
//!
//! | Method | Path                      | Body                 | Reply              |
//! |--------|---------------------------|----------------------|--------------------|
//! | POST   | `/sessions`               | [`CreateRequest`]    | [`CreateResponse`] |
//! | POST   | `/sessions/{id}/answer`   | [`AnswerRequest`]    | [`AnswerResponse`] |
//! | POST   | `/sessions/{id}/question` | [`QuestionRequest`]  | [`QuestionResponse`] |
//! | GET    | `/sessions/{id}`          |                      | [`SessionView`]    |
//! | GET    | `/health`                 |                      | `{"status":"ok"}`  |
//!
//! Failures reply with [`ErrorBody`](crate::ErrorBody) and a 4xx/5xx status.

use std::sync::Arc;

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::routing::{get, post};
use axum::{Json, Router};
use serde_json::{json, Value};
use tower_http::cors::CorsLayer;

use crate::error::ServiceError;
use crate::session::{
    AnswerRequest, AnswerResponse, CreateRequest, CreateResponse, QuestionRequest,
    QuestionResponse, SessionView,
};
use crate::store::SessionStore;

type Shared = State<Arc<SessionStore>>;

fn body<T>(payload: Result<Json<T>, JsonRejection>) -> Result<T, ServiceError> {
    payload
        .map(|Json(value)| value)
        .map_err(|e| ServiceError::BadRequest(e.body_text()))
}

async fn create(
    State(store): Shared,
    payload: Result<Json<CreateRequest>, JsonRejection>,
) -> Result<(StatusCode, Json<CreateResponse>), ServiceError> {
    let request = body(payload)?;
    Ok((StatusCode::CREATED, Json(store.create(&request)?)))
}

async fn answer(
    State(store): Shared,
    Path(id): Path<String>,
    payload: Result<Json<AnswerRequest>, JsonRejection>,
) -> Result<Json<AnswerResponse>, ServiceError> {
    Ok(Json(store.answer(&id, &body(payload)?)?))
}

async fn question(
    State(store): Shared,
    Path(id): Path<String>,
    payload: Result<Json<QuestionRequest>, JsonRejection>,
) -> Result<Json<QuestionResponse>, ServiceError> {
    Ok(Json(store.ask(&id, &body(payload)?)?))
}

async fn view(
    State(store): Shared,
    Path(id): Path<String>,
) -> Result<Json<SessionView>, ServiceError> {
    Ok(Json(store.get(&id)?))
}

async fn health() -> Json<Value> {
    Json(json!({ "status": "ok" }))
}

/// All routes, with permissive CORS so a browser UI on another origin can call them.
pub fn router(store: Arc<SessionStore>) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/sessions", post(create))
        .route("/sessions/{id}", get(view))
        .route("/sessions/{id}/answer", post(answer))
        .route("/sessions/{id}/question", post(question))
        .layer(CorsLayer::permissive())
        .with_state(store)
}
