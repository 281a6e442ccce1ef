//! HTTP endpoints, all under `/v1`:
//!
//! * `GET /v1/health`
//! * `GET /v1/entities`
//! * `GET /v1/aspects`
//! * `POST /v1/summarize` with a [`SummarizeRequest`] body

use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::State;
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Serialize;

use crate::{render, AppConfig, AppError, Engine, SummarizeRequest, API_VERSION};

#[derive(Serialize)]
struct Health<'a> {
    status: &'a str,
    version: &'a str,
    api_version: &'a str,
    model_version: &'a str,
}

#[derive(Serialize)]
struct ErrorBody {
    error: String,
}

fn error(status: StatusCode, message: impl Into<String>) -> Response {
    (status, Json(ErrorBody { error: message.into() })).into_response()
}

impl IntoResponse for AppError {
    fn into_response(self) -> Response {
        let status = match &self {
            AppError::UnknownEntity { .. } => StatusCode::NOT_FOUND,
            AppError::UnknownAspect { .. } => StatusCode::BAD_REQUEST,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        error(status, self.to_string())
    }
}

async fn health(State(engine): State<Arc<Engine>>) -> Response {
    Json(Health {
        status: "ok",
        version: env!("CARGO_PKG_VERSION"),
        api_version: API_VERSION,
        model_version: engine.model_version(),
    })
    .into_response()
}

async fn entities(State(engine): State<Arc<Engine>>) -> Response {
    Json(engine.entities()).into_response()
}

async fn aspects(State(engine): State<Arc<Engine>>) -> Response {
    Json(engine.aspects()).into_response()
}

async fn summarize(State(engine): State<Arc<Engine>>, body: Bytes) -> Response {
    let request: SummarizeRequest = match serde_json::from_slice(&body) {
        Ok(r) => r,
        Err(e) => return error(StatusCode::BAD_REQUEST, format!("malformed request: {e}")),
    };
    let result = tokio::task::spawn_blocking(move || engine.summarize(&request)).await;
    match result {
        Ok(Ok(response)) => ([(header::CONTENT_TYPE, "application/json")], render(&response)).into_response(),
        Ok(Err(e)) => e.into_response(),
        Err(e) => error(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()),
    }
}

pub fn router(engine: Arc<Engine>) -> Router {
    Router::new()
        .route("/v1/health", get(health))
        .route("/v1/entities", get(entities))
        .route("/v1/aspects", get(aspects))
        .route("/v1/summarize", post(summarize))
        .with_state(engine)
}

/// Loads everything once and serves until interrupted.
pub async fn serve(config: &AppConfig) -> Result<(), AppError> {
    let engine = Arc::new(Engine::load(config)?);
    let addr = format!("{}:{}", config.service.host, config.service.port);
    let listener = tokio::net::TcpListener::bind(&addr).await.map_err(|e| AppError::Io(addr.clone(), e))?;
    log::info!("listening on {addr}");
    axum::serve(listener, router(engine))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
        .map_err(|e| AppError::Io(addr, e))
}
