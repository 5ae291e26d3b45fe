//! The session API over HTTP with JSON bodies.
//!
//! | method | path                    | body                 | reply            |
//! |--------|-------------------------|----------------------|------------------|
//! | POST   | /sessions               | `SessionRequest`     | `SessionView`    |
//! | GET    | /sessions               |                      | `[SessionView]`  |
//! | GET    | /sessions/{id}          |                      | `SessionView`    |
//! | POST   | /sessions/{id}/answer   | `AnswerRequest`      | `SessionView`    |
//! | POST   | /sessions/{id}/undo     |                      | `SessionView`    |
//! | POST   | /sessions/{id}/abort    |                      | `SessionView`    |
//! | GET    | /sessions/{id}/result   |                      | `SessionResult`  |
//! | GET    | /sessions/{id}/events   |                      | `[Event]`        |
//!
//! Errors come back as `{"error": "..."}` with 404 for unknown sessions,
//! 409 when the session cannot take the request in its current state and
//! 422 for bodies that do not parse or answers that do not fit.

use std::net::SocketAddr;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::service::{ServiceError, SessionManager};
use crate::session::SessionError;

type Shared = State<Arc<SessionManager>>;

fn error(status: StatusCode, message: impl ToString) -> Response {
    (status, Json(serde_json::json!({ "error": message.to_string() }))).into_response()
}

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        let status = match &self {
            ServiceError::NotFound(_) => StatusCode::NOT_FOUND,
            ServiceError::Session(e) => match e {
                SessionError::Setup(_) | SessionError::InvalidAnswer(_) | SessionError::Threshold(_) => {
                    StatusCode::UNPROCESSABLE_ENTITY
                }
                SessionError::Conflict(_) => StatusCode::CONFLICT,
                SessionError::Solver(_) | SessionError::Log(_) => StatusCode::INTERNAL_SERVER_ERROR,
            },
            ServiceError::Store(_) | ServiceError::Solver(_) => StatusCode::INTERNAL_SERVER_ERROR,
        };
        error(status, self)
    }
}

fn parse<T: DeserializeOwned>(body: &Bytes) -> Result<T, Response> {
    serde_json::from_slice(body).map_err(|e| error(StatusCode::UNPROCESSABLE_ENTITY, e))
}

/// Run blocking session work off the async workers.
async fn blocking<T, F>(m: Arc<SessionManager>, ok: StatusCode, f: F) -> Response
where
    T: Serialize + Send + 'static,
    F: FnOnce(&SessionManager) -> Result<T, ServiceError> + Send + 'static,
{
    match tokio::task::spawn_blocking(move || f(&m)).await {
        Ok(Ok(v)) => (ok, Json(v)).into_response(),
        Ok(Err(e)) => e.into_response(),
        Err(e) => error(StatusCode::INTERNAL_SERVER_ERROR, e),
    }
}

async fn create(State(m): Shared, body: Bytes) -> Response {
    match parse(&body) {
        Ok(req) => blocking(m, StatusCode::CREATED, move |m| m.create(req)).await,
        Err(r) => r,
    }
}

async fn list(State(m): Shared) -> Response {
    blocking(m, StatusCode::OK, |m| Ok(m.list())).await
}

async fn show(State(m): Shared, Path(id): Path<String>) -> Response {
    blocking(m, StatusCode::OK, move |m| m.view(&id)).await
}

async fn answer(State(m): Shared, Path(id): Path<String>, body: Bytes) -> Response {
    match parse(&body) {
        Ok(a) => blocking(m, StatusCode::OK, move |m| m.answer(&id, a)).await,
        Err(r) => r,
    }
}

async fn undo(State(m): Shared, Path(id): Path<String>) -> Response {
    blocking(m, StatusCode::OK, move |m| m.undo(&id)).await
}

async fn abort(State(m): Shared, Path(id): Path<String>) -> Response {
    blocking(m, StatusCode::OK, move |m| m.abort(&id)).await
}

async fn result(State(m): Shared, Path(id): Path<String>) -> Response {
    blocking(m, StatusCode::OK, move |m| m.result(&id)).await
}

async fn events(State(m): Shared, Path(id): Path<String>) -> Response {
    blocking(m, StatusCode::OK, move |m| m.events(&id)).await
}

pub fn router(manager: Arc<SessionManager>) -> Router {
    Router::new()
        .route("/sessions", post(create).get(list))
        .route("/sessions/{id}", get(show))
        .route("/sessions/{id}/answer", post(answer))
        .route("/sessions/{id}/undo", post(undo))
        .route("/sessions/{id}/abort", post(abort))
        .route("/sessions/{id}/result", get(result))
        .route("/sessions/{id}/events", get(events))
        .with_state(manager)
}

pub async fn serve(manager: Arc<SessionManager>, addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(manager)).await
}
