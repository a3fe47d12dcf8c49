//! HTTP facade over survey sessions, for a reader labeling comments from a
//! browser.
//!
//! | method | path | |
//! |---|---|---|
//! | POST | `/sessions` | create a session |
//! | GET | `/sessions` | list session ids |
//! | GET | `/sessions/{id}/batch` | the batch awaiting labels |
//! | POST | `/sessions/{id}/labels` | submit labels for that batch |
//! | GET | `/sessions/{id}/status` | progress snapshot |
//! | POST | `/sessions/{id}/stop` | stop manually |

mod error;
mod state;
pub mod views;

use std::net::SocketAddr;
use std::sync::Arc;

use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::routing::{get, post};
use axum::{Json, Router};
use serde_json::{json, Value};

pub use error::ApiError;
pub use state::{AppState, SessionMeta};
use views::{BatchView, CreateRequest, Created, LabelsRequest, ReportView, StatusView};

/// Port used when `SURVEY_PORT` is unset.
pub const DEFAULT_PORT: u16 = 8787;
pub const PORT_ENV: &str = "SURVEY_PORT";

type Shared = Arc<AppState>;

pub fn router(state: Shared) -> Router {
    Router::new()
        .route("/sessions", post(create).get(list))
        .route("/sessions/{id}/batch", get(batch))
        .route("/sessions/{id}/labels", post(labels))
        .route("/sessions/{id}/status", get(status))
        .route("/sessions/{id}/stop", post(stop))
        .with_state(state)
}

async fn blocking<T: Send + 'static>(
    f: impl FnOnce() -> Result<T, ApiError> + Send + 'static,
) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::internal(format!("worker failed: {e}")))?
}

async fn create(
    State(state): State<Shared>,
    Json(req): Json<CreateRequest>,
) -> Result<(StatusCode, Json<Created>), ApiError> {
    let worker = state.clone();
    let entry = blocking(move || worker.create_blocking(&req)).await?;
    let created = {
        let e = entry.lock().await;
        Created {
            id: e.meta.id.clone(),
            project: e.meta.project.clone(),
            pool_size: e.session.corpus().len(),
            status: e.session.status().as_str(),
        }
    };
    state.register(entry).await;
    Ok((StatusCode::CREATED, Json(created)))
}

async fn list(State(state): State<Shared>) -> Json<Value> {
    Json(json!({ "sessions": state.ids().await }))
}

async fn batch(
    State(state): State<Shared>,
    Path(id): Path<String>,
) -> Result<Json<BatchView>, ApiError> {
    let entry = state.get(&id).await?;
    let mut e = entry.lock().await;
    let b = e.session.next_batch()?;
    Ok(Json(BatchView::new(&id, b)))
}

async fn labels(
    State(state): State<Shared>,
    Path(id): Path<String>,
    Json(req): Json<LabelsRequest>,
) -> Result<Json<ReportView>, ApiError> {
    let entry = state.get(&id).await?;
    let mut guard = entry.lock_owned().await;
    let answers: Vec<(usize, bool)> = req.labels.into_iter().collect();
    let report = blocking(move || Ok(guard.session.submit_labels(&answers)?)).await?;
    Ok(Json(ReportView::from(&report)))
}

async fn status(
    State(state): State<Shared>,
    Path(id): Path<String>,
) -> Result<Json<StatusView>, ApiError> {
    let entry = state.get(&id).await?;
    let e = entry.lock().await;
    Ok(Json(StatusView::of(&id, &e.session)))
}

async fn stop(
    State(state): State<Shared>,
    Path(id): Path<String>,
) -> Result<Json<StatusView>, ApiError> {
    let entry = state.get(&id).await?;
    let mut e = entry.lock().await;
    e.session.stop()?;
    Ok(Json(StatusView::of(&id, &e.session)))
}

/// Port from `SURVEY_PORT`, else [`DEFAULT_PORT`].
pub fn port_from_env() -> Result<u16, String> {
    match std::env::var(PORT_ENV) {
        Err(_) => Ok(DEFAULT_PORT),
        Ok(v) => v
            .parse()
            .map_err(|_| format!("{PORT_ENV}={v} is not a port number")),
    }
}

/// Restores logged sessions, then serves on `addr` until the process ends.
pub async fn serve(state: Shared, addr: SocketAddr) -> std::io::Result<()> {
    let worker = state.clone();
    let restored = tokio::task::spawn_blocking(move || worker.restore_blocking())
        .await
        .map_err(std::io::Error::other)?
        .map_err(|e| std::io::Error::other(e.message))?;
    if restored > 0 {
        log::info!("restored {restored} sessions");
    }
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(state)).await
}
