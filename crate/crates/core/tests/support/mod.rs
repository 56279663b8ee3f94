#![allow(dead_code)]

pub mod model;
pub mod reference;

use std::path::{Path, PathBuf};
use std::sync::Arc;

use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::Value;
use tempfile::TempDir;
use tower::ServiceExt;

use taleweave::agents::{Agents, TemplateSet};
use taleweave::assets::{AssetRef, AssetStore};
use taleweave::domain::{Clock, Session, SteppingClock, StoryOutline, TaskId};
use taleweave::provider::Gateway;
use taleweave::service::{router, AppState, Principal, Principals, Role, ServiceOptions, Store};
use taleweave::session::{Engine, SessionTask};
use taleweave::sim::ResponseScript;

pub fn fixture(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(rel)
}

pub struct Case {
    pub label: String,
    pub dir: PathBuf,
    pub outline: StoryOutline,
    pub script: ResponseScript,
}

impl Case {
    pub fn outline_path(&self) -> PathBuf {
        self.dir.join("outline.json")
    }

    pub fn script_path(&self) -> PathBuf {
        self.dir.join("script.json")
    }
}

/// One corpus child, e.g. `case(1)` for `c01`.
pub fn case(n: usize) -> Case {
    let dir = fixture(&format!("corpus/c{n:02}"));
    let outline = StoryOutline::from_document(&std::fs::read_to_string(dir.join("outline.json")).unwrap())
        .unwrap_or_else(|e| panic!("c{n:02} outline: {e}"));
    let script = ResponseScript::load(&dir.join("script.json")).unwrap_or_else(|e| panic!("c{n:02} script: {e}"));
    Case { label: format!("C{n}"), dir, outline, script }
}

pub fn corpus() -> Vec<Case> {
    (1..=12).map(case).collect()
}

/// An engine over mock providers and a throwaway asset store.
pub struct Rig {
    pub dir: TempDir,
    pub assets: Arc<AssetStore>,
    pub engine: Engine,
    pub clock: Arc<SteppingClock>,
}

impl Rig {
    pub fn new(seed: u64) -> Rig {
        Rig::with_gateway(seed, |g| g)
    }

    /// `wrap` can swap providers, e.g. for fault injection.
    pub fn with_gateway(seed: u64, wrap: impl FnOnce(Gateway) -> Gateway) -> Rig {
        let dir = tempfile::tempdir().unwrap();
        let assets = Arc::new(AssetStore::open(dir.path()).unwrap());
        let clock = Arc::new(SteppingClock::default());
        let gateway = wrap(Gateway::mock(seed, assets.clone()));
        let engine = Engine::new(Agents::new(gateway, TemplateSet::builtin()), clock.clone(), "storyteller");
        Rig { dir, assets, engine, clock }
    }

    pub fn session(&self, outline: &StoryOutline, seed: u64) -> Session {
        let task = SessionTask::deploy(TaskId::new(format!("tsk_{seed}")), outline, "child", self.clock.now())
            .expect("valid outline");
        self.engine.open(&task, seed, Some("test".into()))
    }

    pub fn drawing(&self) -> AssetRef {
        self.assets.import(&fixture("corpus/c01/drawing.png")).unwrap()
    }
}

pub const EXPERT: &str = "expert-token-0001";
pub const DEVICE: &str = "device-token-0001";
pub const PARENT: &str = "parent-token-0001";

pub fn principal(id: &str, role: Role, token: &str) -> Principal {
    Principal { principal_id: id.into(), role, token: token.into(), shared_sessions: Vec::new() }
}

pub fn default_principals() -> Vec<Principal> {
    vec![
        principal("teacher", Role::Expert, EXPERT),
        principal("device-1", Role::Device, DEVICE),
        principal("parent-1", Role::ParentViewer, PARENT),
    ]
}

/// The router over a data directory with mock providers.
pub fn app(data: &Path, principals: Vec<Principal>, options: ServiceOptions) -> Router {
    let store = Store::open(data).unwrap();
    let gateway = Gateway::mock(7, store.assets().clone());
    let engine = Engine::new(Agents::new(gateway, TemplateSet::builtin()), Arc::new(SteppingClock::default()), "storyteller");
    router(AppState::new(store, engine, Principals::new(principals).unwrap(), options))
}

pub fn manual() -> ServiceOptions {
    ServiceOptions { auto_advance: false, ..Default::default() }
}

pub struct Reply {
    pub status: StatusCode,
    pub headers: axum::http::HeaderMap,
    pub body: Value,
}

pub async fn send(app: &Router, req: Request<Body>) -> Reply {
    let resp = app.clone().oneshot(req).await.expect("infallible");
    let status = resp.status();
    let headers = resp.headers().clone();
    let bytes = resp.into_body().collect().await.expect("body").to_bytes();
    let body = serde_json::from_slice(&bytes)
        .unwrap_or_else(|_| Value::String(String::from_utf8_lossy(&bytes).into_owned()));
    Reply { status, headers, body }
}

pub fn request(method: Method, uri: &str, token: Option<&str>, body: Option<&Value>) -> Request<Body> {
    let mut req = Request::builder().method(method).uri(uri);
    if let Some(token) = token {
        req = req.header("authorization", format!("Bearer {token}"));
    }
    match body {
        Some(v) => req.header("content-type", "application/json").body(Body::from(v.to_string())).unwrap(),
        None => req.body(Body::empty()).unwrap(),
    }
}

pub async fn call(app: &Router, method: Method, uri: &str, token: &str, body: Option<Value>) -> Reply {
    send(app, request(method, uri, Some(token), body.as_ref())).await
}

pub fn multipart(parts: &[(&str, Option<&str>, &[u8])]) -> (String, Vec<u8>) {
    let boundary = "taleweave-test-boundary";
    let mut body = Vec::new();
    for (name, filename, bytes) in parts {
        body.extend_from_slice(format!("--{boundary}\r\nContent-Disposition: form-data; name=\"{name}\"").as_bytes());
        if let Some(f) = filename {
            body.extend_from_slice(format!("; filename=\"{f}\"\r\nContent-Type: image/png").as_bytes());
        }
        body.extend_from_slice(b"\r\n\r\n");
        body.extend_from_slice(bytes);
        body.extend_from_slice(b"\r\n");
    }
    body.extend_from_slice(format!("--{boundary}--\r\n").as_bytes());
    (format!("multipart/form-data; boundary={boundary}"), body)
}

pub async fn upload_drawing(app: &Router, sid: &str, token: &str, png: &[u8], name: &str) -> Reply {
    let (ctype, body) = multipart(&[("image", Some("d.png"), png), ("name", None, name.as_bytes())]);
    let req = Request::post(format!("/sessions/{sid}/drawing"))
        .header("authorization", format!("Bearer {token}"))
        .header("content-type", ctype)
        .body(Body::from(body))
        .unwrap();
    send(app, req).await
}

pub fn drawing_png() -> Vec<u8> {
    std::fs::read(fixture("corpus/c01/drawing.png")).unwrap()
}

/// Writes `outline` into the data directory before a router is built on it.
pub fn seed_outline(data: &Path, outline: &StoryOutline) {
    Store::open(data).unwrap().put_outline(outline.clone(), None).unwrap();
}

/// Deploys a seeded outline; returns the task id.
pub async fn deploy(app: &Router, outline_id: &str, label: &str) -> String {
    let task = call(app, Method::POST, "/tasks", EXPERT, Some(serde_json::json!({ "outline_id": outline_id, "child_label": label }))).await;
    assert!(task.status.is_success(), "deploy: {} {}", task.status, task.body);
    task.body["task_id"].as_str().unwrap().to_string()
}

/// Device starts a session on `task`; returns the session id.
pub async fn start(app: &Router, task: &str, seed: u64) -> String {
    let r = call(app, Method::POST, "/sessions", DEVICE, Some(serde_json::json!({ "task_id": task, "seed": seed }))).await;
    assert!(r.status.is_success(), "start: {} {}", r.status, r.body);
    r.body["session_id"].as_str().unwrap().to_string()
}
