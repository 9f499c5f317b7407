//! HTTP routes.

use std::path::PathBuf;
use std::sync::Arc;

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{Html, IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use optlab_core::presets::presets;
use tower_http::services::ServeDir;

use crate::service::{ErrorKind, QueryRequest, Service, ServiceError};

const PLACEHOLDER: &str = "<!doctype html>
<html>
<head><meta charset=\"utf-8\"><title>optlab</title></head>
<body>
<h1>optlab</h1>
<p>No UI bundle is configured. Start the server with <code>--ui-dir</code> to serve one.</p>
<ul>
<li><code>POST /api/v1/query</code></li>
<li><code>GET /api/v1/history</code></li>
<li><code>GET /api/v1/history/{id}</code></li>
<li><code>GET /api/v1/presets</code></li>
<li><code>GET /api/v1/catalogs</code></li>
</ul>
</body>
</html>
";

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        let status = match self.kind {
            ErrorKind::BadRequest => StatusCode::BAD_REQUEST,
            ErrorKind::NotFound => StatusCode::NOT_FOUND,
            ErrorKind::Internal => StatusCode::INTERNAL_SERVER_ERROR,
        };
        (status, Json(self)).into_response()
    }
}

pub fn router(service: Arc<Service>, ui_dir: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/api/v1/query", post(query))
        .route("/api/v1/history", get(history_list))
        .route("/api/v1/history/{id}", get(history_get))
        .route("/api/v1/presets", get(preset_list))
        .route("/api/v1/catalogs", get(catalog_list))
        .with_state(service);
    match ui_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api.route("/", get(|| async { Html(PLACEHOLDER) })),
    }
}

async fn query(
    State(service): State<Arc<Service>>,
    body: Result<Json<QueryRequest>, JsonRejection>,
) -> Result<Response, ServiceError> {
    let Json(request) = body
        .map_err(|e| ServiceError::new(ErrorKind::BadRequest, "invalid_request", e.body_text()))?;
    let trace = tokio::task::spawn_blocking(move || service.handle_query(&request))
        .await
        .map_err(|e| ServiceError::new(ErrorKind::Internal, "internal_error", e.to_string()))??;
    Ok(Json(trace).into_response())
}

async fn history_list(State(service): State<Arc<Service>>) -> Response {
    Json(service.history_list()).into_response()
}

async fn history_get(
    State(service): State<Arc<Service>>,
    Path(id): Path<String>,
) -> Result<Response, ServiceError> {
    Ok(Json(service.history_get(&id)?).into_response())
}

async fn preset_list() -> Response {
    Json(presets()).into_response()
}

async fn catalog_list(State(service): State<Arc<Service>>) -> Response {
    Json(service.catalogs()).into_response()
}
