use std::fs;
use std::sync::Arc;

use axum::body::Body;
use axum::http::{header, Request, StatusCode};
use axum::Router;
use coursemap::synthlab::{generate_degraded_course, SynthParams};
use coursemap::{AnalysisBundle, Config};
use coursemap_cli::service::router;
use serde_json::Value;
use tower::ServiceExt;

fn bundle() -> AnalysisBundle {
    let params = SynthParams {
        n_chapters: 4,
        lecture_length_tokens: 1500,
        seed: 3,
        ..SynthParams::default()
    };
    let course = generate_degraded_course(&params).unwrap();
    AnalysisBundle::build(course.corpus, &Config::default(), Some(course.truth)).unwrap()
}

async fn get(app: &Router, uri: &str) -> (StatusCode, Option<String>, Vec<u8>) {
    let req = Request::builder().uri(uri).body(Body::empty()).unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let ctype = resp
        .headers()
        .get(header::CONTENT_TYPE)
        .map(|v| v.to_str().unwrap().to_string());
    let body = axum::body::to_bytes(resp.into_body(), usize::MAX).await.unwrap();
    (status, ctype, body.to_vec())
}

async fn get_json(app: &Router, uri: &str) -> (StatusCode, Value) {
    let (status, ctype, body) = get(app, uri).await;
    assert!(ctype.unwrap().starts_with("application/json"), "{uri}");
    (status, serde_json::from_slice(&body).unwrap())
}

#[tokio::test]
async fn meta_describes_course() {
    let app = router(Arc::new(bundle()), None);
    let (status, v) = get_json(&app, "/api/meta").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v["n_transcripts"], 4);
    assert_eq!(v["lecture_ids"].as_array().unwrap().len(), 4);
    assert_eq!(v["has_ground_truth"], true);
    assert!(v["n_phrases"].as_u64().unwrap() > 0);
}

#[tokio::test]
async fn phrases_and_chaptermatch() {
    let app = router(Arc::new(bundle()), None);
    let (_, phrases) = get_json(&app, "/api/phrases").await;
    let phrases = phrases.as_array().unwrap();
    assert!(!phrases.is_empty());
    assert_eq!(phrases[0]["id"], 0);

    let (status, m) = get_json(&app, "/api/chaptermatch?mode=phrases&zoom=4").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(m["mode"], "phrases");
    assert_eq!(m["scores"].as_array().unwrap().len(), 4);
}

#[tokio::test]
async fn similarity_by_text_and_id() {
    let b = bundle();
    let text = b.phrases()[1].text.clone();
    let app = router(Arc::new(b), None);
    let (s1, by_id) = get_json(&app, "/api/similarity?phrases=1,2").await;
    assert_eq!(s1, StatusCode::OK);
    assert_eq!(by_id["nodes"].as_array().unwrap().len(), 4);
    let uri = format!("/api/similarity?phrases={},2", text.replace(' ', "%20"));
    let (s2, by_text) = get_json(&app, &uri).await;
    assert_eq!(s2, StatusCode::OK);
    assert_eq!(by_id, by_text);
}

#[tokio::test]
async fn unknown_endpoint_is_json_404() {
    let app = router(Arc::new(bundle()), None);
    let (status, v) = get_json(&app, "/api/nothing").await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert!(v["error"].is_string());
}

#[tokio::test]
async fn static_files_served_outside_api() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("index.html"), "<html>ok</html>").unwrap();
    let app = router(Arc::new(bundle()), Some(dir.path().to_path_buf()));
    let (status, _, body) = get(&app, "/index.html").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body, b"<html>ok</html>");
    let (status, v) = get_json(&app, "/api/meta").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v["n_transcripts"], 4);
}
