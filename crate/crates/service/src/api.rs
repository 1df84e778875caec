//! HTTP face of the service. Bodies are parsed from raw bytes so every
//! failure mode, including undecodable JSON, produces the same
//! `{code, message}` error shape with a matching status code.

use crate::config::ServiceConfig;
use crate::state::{EvalService, ErrorCode, OpenTarget, ServiceError, TurnReply, WirePrediction};
use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::header::{HeaderMap, AUTHORIZATION, CONTENT_TYPE};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use scribbleval_core::robot::wire::WireScribbleSet;
use scribbleval_core::session::curve::SessionReport;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OpenRequest {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sequence: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpenResponse {
    pub session_id: String,
    pub sequence: String,
    pub frames: usize,
    pub width: u32,
    pub height: u32,
    pub objects: Vec<u8>,
    pub scribbles: WireScribbleSet,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScribbleResponse {
    pub scribbles: WireScribbleSet,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportResponse {
    pub report: SessionReport,
}

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        let status =
            StatusCode::from_u16(self.code.http_status()).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
        (status, Json(self)).into_response()
    }
}

fn internal(e: impl std::fmt::Display) -> ServiceError {
    ServiceError::new(ErrorCode::Internal, e.to_string())
}

fn parse_body<T: serde::de::DeserializeOwned>(body: &[u8]) -> Result<T, ServiceError> {
    serde_json::from_slice(body)
        .map_err(|e| ServiceError::new(ErrorCode::Format, format!("request body: {e}")))
}

fn bearer(headers: &HeaderMap) -> Option<String> {
    let value = headers.get(AUTHORIZATION)?.to_str().ok()?;
    let token = value.strip_prefix("Bearer ").or_else(|| value.strip_prefix("bearer "))?;
    Some(token.trim().to_owned())
}

async fn health() -> Response {
    Json(serde_json::json!({"status": "ok"})).into_response()
}

async fn unknown_route() -> ServiceError {
    ServiceError::new(ErrorCode::NotFound, "no such endpoint")
}

async fn open_session(
    State(svc): State<Arc<EvalService>>,
    headers: HeaderMap,
    body: Bytes,
) -> Result<Response, ServiceError> {
    let token = svc.authenticate(bearer(&headers).as_deref())?;
    let req: OpenRequest = parse_body(&body)?;
    let opened = tokio::task::spawn_blocking(move || {
        let target = match (&req.sequence, &req.split) {
            (Some(s), None) => OpenTarget::Sequence(s),
            (None, Some(s)) => OpenTarget::Split(s),
            _ => {
                return Err(ServiceError::new(
                    ErrorCode::Format,
                    "give exactly one of sequence or split",
                ))
            }
        };
        svc.open(&token, target)
    })
    .await
    .map_err(internal)??;
    Ok(Json(OpenResponse {
        session_id: opened.session_id,
        sequence: opened.sequence,
        frames: opened.frames,
        width: opened.size.width(),
        height: opened.size.height(),
        objects: opened.objects,
        scribbles: opened.scribbles,
    })
    .into_response())
}

async fn submit_prediction(
    State(svc): State<Arc<EvalService>>,
    Path(id): Path<String>,
    headers: HeaderMap,
    body: Bytes,
) -> Result<Response, ServiceError> {
    let token = svc.authenticate(bearer(&headers).as_deref())?;
    let wire: WirePrediction = parse_body(&body)?;
    let reply = tokio::task::spawn_blocking(move || svc.submit(&token, &id, &wire))
        .await
        .map_err(internal)??;
    Ok(match reply {
        TurnReply::Scribbles(scribbles) => Json(ScribbleResponse { scribbles }).into_response(),
        TurnReply::Report(report) => Json(ReportResponse { report: *report }).into_response(),
    })
}

/// Serves the persisted report document verbatim, so the bytes match across
/// repeated reads and process restarts.
async fn get_report(
    State(svc): State<Arc<EvalService>>,
    Path(id): Path<String>,
    headers: HeaderMap,
) -> Result<Response, ServiceError> {
    let token = svc.authenticate(bearer(&headers).as_deref())?;
    let bytes = tokio::task::spawn_blocking(move || svc.report_bytes(&token, &id))
        .await
        .map_err(internal)??;
    Ok(([(CONTENT_TYPE, "application/json")], bytes).into_response())
}

pub fn router(service: Arc<EvalService>) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/session", post(open_session))
        .route("/session/{id}/prediction", post(submit_prediction))
        .route("/session/{id}/report", get(get_report))
        .fallback(unknown_route)
        .with_state(service)
}

async fn log_request(
    req: axum::extract::Request,
    next: axum::middleware::Next,
) -> axum::response::Response {
    let method = req.method().clone();
    let path = req.uri().path().to_owned();
    let started = std::time::Instant::now();
    let response = next.run(req).await;
    eprintln!(
        "{method} {path} {} {:.1}ms",
        response.status().as_u16(),
        started.elapsed().as_secs_f64() * 1e3
    );
    response
}

/// Run on an already-bound listener until ctrl-c. Unlike the bare router,
/// this path logs one line per request.
pub async fn serve_listener(
    listener: tokio::net::TcpListener,
    service: Arc<EvalService>,
) -> Result<(), ServiceError> {
    let app = router(service).layer(axum::middleware::from_fn(log_request));
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
        .map_err(internal)
}

/// Bind and run until ctrl-c.
pub async fn serve(config: ServiceConfig) -> Result<(), ServiceError> {
    let addr = config.listen_addr.clone();
    let service = Arc::new(EvalService::new(config)?);
    let listener = tokio::net::TcpListener::bind(&addr).await.map_err(internal)?;
    eprintln!("listening on {}", listener.local_addr().map_err(internal)?);
    serve_listener(listener, service).await
}
