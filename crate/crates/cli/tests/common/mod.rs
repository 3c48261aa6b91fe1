#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::sync::Arc;

use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use modelgate_cli::AppState;
use modelgate_core::{Assessor, Library};
use serde_json::Value;
use tower::ServiceExt;

pub const WEAK: [&str; 4] = ["semantic-validity", "completeness", "purpose-extraction", "appeal"];

pub fn fixture(rel: &str) -> String {
    let p = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures").join(rel);
    std::fs::read_to_string(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

pub fn media() -> String {
    fixture("clean/media.mdl")
}

pub fn dao() -> String {
    fixture("seeded/technology-leftover-name.mdl")
}

pub fn new_root() -> (tempfile::TempDir, PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path().join("lib");
    Library::init(&root).unwrap();
    (dir, root)
}

pub fn state(root: &Path) -> Arc<AppState> {
    Arc::new(AppState::new(Assessor::new(Library::open(root).unwrap())))
}

pub fn read_only_state(root: &Path) -> Arc<AppState> {
    Arc::new(AppState::new(Assessor::new(Library::open_read_only(root).unwrap())))
}

pub async fn call(app: &Router, method: Method, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let mut req = Request::builder().method(method).uri(uri);
    let body = match body {
        Some(v) => {
            req = req.header("content-type", "application/json");
            Body::from(serde_json::to_vec(&v).unwrap())
        }
        None => Body::empty(),
    };
    let resp = app.clone().oneshot(req.body(body).unwrap()).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let json = if bytes.is_empty() { Value::Null } else { serde_json::from_slice(&bytes).unwrap_or(Value::String(String::from_utf8_lossy(&bytes).into())) };
    (status, json)
}

/// Runs the CLI in-process; returns (exit, stdout, stderr).
pub fn cli(root: &Path, args: &[&str]) -> (i32, String, String) {
    let mut full = vec!["modelgate".to_string(), "--root".into(), root.display().to_string()];
    full.extend(args.iter().map(|s| s.to_string()));
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = modelgate_cli::cli::run(full, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

/// Drops fields that differ between two runs of the same scenario.
pub fn strip_volatile(v: &mut Value) {
    match v {
        Value::Object(map) => {
            for key in ["created_at", "updated_at", "generated_at"] {
                map.remove(key);
            }
            map.values_mut().for_each(strip_volatile);
        }
        Value::Array(items) => items.iter_mut().for_each(strip_volatile),
        _ => {}
    }
}

pub fn meta_json(root: &Path, entry: &str) -> Value {
    let mut v: Value = serde_json::from_str(&std::fs::read_to_string(root.join(entry).join("meta.json")).unwrap()).unwrap();
    strip_volatile(&mut v);
    v
}
