//! HTTP/JSON service over a prebuilt [`AnalysisBundle`].
//!
//! The bundle is immutable and shared by every handler. Query strings are
//! parsed by hand so that every bad parameter yields a JSON error body.

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::Arc;

use axum::extract::{Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::Router;
use coursemap::chaptermatch::FeatureMode;
use coursemap::indexmap::ViewFilter;
use coursemap::{AnalysisBundle, Error};
use serde::Serialize;
use tower_http::services::ServeDir;

type Params = Query<HashMap<String, String>>;

#[derive(Clone)]
struct AppState {
    bundle: Arc<AnalysisBundle>,
}

/// JSON error response.
#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    message: String,
}

impl ApiError {
    fn bad_request(message: impl Into<String>) -> Self {
        Self {
            status: StatusCode::BAD_REQUEST,
            message: message.into(),
        }
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::Filter(_)
            | Error::EmptySelection
            | Error::UnknownPhrases(_)
            | Error::Param(_)
            | Error::Thresholds { .. }
            | Error::TooFewPoints { .. } => StatusCode::BAD_REQUEST,
            Error::NoChapters => StatusCode::NOT_FOUND,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        Self {
            status,
            message: e.to_string(),
        }
    }
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    error: &'a str,
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = serde_json::to_vec(&ErrorBody { error: &self.message }).expect("serializable");
        (self.status, [(header::CONTENT_TYPE, "application/json; charset=utf-8")], body).into_response()
    }
}

fn json<T: Serialize>(value: &T) -> Result<Response, ApiError> {
    let body = serde_json::to_vec(value).map_err(|e| ApiError {
        status: StatusCode::INTERNAL_SERVER_ERROR,
        message: e.to_string(),
    })?;
    Ok(([(header::CONTENT_TYPE, "application/json; charset=utf-8")], body).into_response())
}

fn parse_usize(q: &HashMap<String, String>, key: &str, default: usize) -> Result<usize, ApiError> {
    match q.get(key).map(|s| s.trim()) {
        None | Some("") => Ok(default),
        Some(v) => v
            .parse()
            .map_err(|_| ApiError::bad_request(format!("{key} must be a positive integer, got {v:?}"))),
    }
}

/// Routes under `/api`, plus static files from `static_dir` when given.
pub fn router(bundle: Arc<AnalysisBundle>, static_dir: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/meta", get(meta))
        .route("/phrases", get(phrases))
        .route("/indexmap", get(indexmap))
        .route("/chaptermatch", get(chaptermatch))
        .route("/similarity", get(similarity))
        .route("/stats", get(stats))
        .fallback(|| async {
            ApiError {
                status: StatusCode::NOT_FOUND,
                message: "unknown endpoint".into(),
            }
        });
    let app = Router::new().nest("/api", api).with_state(AppState { bundle });
    match static_dir {
        Some(dir) => app.fallback_service(ServeDir::new(dir)),
        None => app,
    }
}

async fn meta(State(s): State<AppState>) -> Result<Response, ApiError> {
    json(&s.bundle.meta())
}

async fn phrases(State(s): State<AppState>) -> Result<Response, ApiError> {
    json(&s.bundle.phrases())
}

async fn indexmap(State(s): State<AppState>, Query(q): Params) -> Result<Response, ApiError> {
    let d = s.bundle.default_filter();
    let filter = ViewFilter {
        zoom: parse_usize(&q, "zoom", d.zoom)?,
        focus: parse_usize(&q, "focus", d.focus)?,
        contrast: parse_usize(&q, "contrast", d.contrast)?,
    };
    json(&s.bundle.index_map(filter)?)
}

async fn chaptermatch(State(s): State<AppState>, Query(q): Params) -> Result<Response, ApiError> {
    let mode = match q.get("mode").map(|m| m.trim()) {
        None | Some("") => FeatureMode::PhrasesAndPairs,
        Some(m) => m.parse().map_err(|e: Error| ApiError::bad_request(e.to_string()))?,
    };
    let zoom = parse_usize(&q, "zoom", s.bundle.default_filter().zoom)?;
    json(&s.bundle.chapter_match(mode, zoom)?)
}

async fn similarity(State(s): State<AppState>, Query(q): Params) -> Result<Response, ApiError> {
    let raw = q.get("phrases").map(String::as_str).unwrap_or("");
    let items: Vec<&str> = raw.split(',').collect();
    let selection = s.bundle.resolve_selection(&items)?;
    json(&s.bundle.similarity(&selection)?)
}

async fn stats(State(s): State<AppState>) -> Result<Response, ApiError> {
    json(s.bundle.stats())
}
