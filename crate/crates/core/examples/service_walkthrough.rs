//! One session through the HTTP API, in process: the expert authors and
//! deploys, the device plays, the teacher overrides a branch and comments,
//! and the parent reads the annotated book.

use std::error::Error;
use std::sync::Arc;

use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

use taleweave::agents::{Agents, TemplateSet};
use taleweave::domain::SteppingClock;
use taleweave::provider::Gateway;
use taleweave::service::{router, AppState, Principal, Principals, Role, ServiceOptions, Store};
use taleweave::session::Engine;

const EXPERT: &str = "expert-token-0001";
const DEVICE: &str = "device-token-0001";
const PARENT: &str = "parent-token-0001";

async fn call(app: &Router, method: Method, uri: &str, token: &str, body: Option<Value>) -> (StatusCode, Value) {
    let mut req = Request::builder().method(method).uri(uri).header("authorization", format!("Bearer {token}"));
    let body = match body {
        Some(v) => {
            req = req.header("content-type", "application/json");
            Body::from(v.to_string())
        }
        None => Body::empty(),
    };
    let resp = app.clone().oneshot(req.body(body).expect("request")).await.expect("infallible");
    let status = resp.status();
    let bytes = resp.into_body().collect().await.expect("body").to_bytes();
    (status, serde_json::from_slice(&bytes).unwrap_or_else(|_| Value::String(String::from_utf8_lossy(&bytes).into())))
}

async fn upload_drawing(app: &Router, sid: &str, png: &[u8], name: &str) -> StatusCode {
    let boundary = "taleweave-example";
    let mut body = Vec::new();
    body.extend_from_slice(
        format!("--{boundary}\r\nContent-Disposition: form-data; name=\"image\"; filename=\"d.png\"\r\nContent-Type: image/png\r\n\r\n").as_bytes(),
    );
    body.extend_from_slice(png);
    body.extend_from_slice(
        format!("\r\n--{boundary}\r\nContent-Disposition: form-data; name=\"name\"\r\n\r\n{name}\r\n--{boundary}--\r\n").as_bytes(),
    );
    let req = Request::post(format!("/sessions/{sid}/drawing"))
        .header("authorization", format!("Bearer {DEVICE}"))
        .header("content-type", format!("multipart/form-data; boundary={boundary}"))
        .body(Body::from(body))
        .expect("request");
    app.clone().oneshot(req).await.expect("infallible").status()
}

fn principal(id: &str, role: Role, token: &str) -> Principal {
    Principal { principal_id: id.into(), role, token: token.into(), shared_sessions: Vec::new() }
}

async fn walkthrough() -> Result<(), Box<dyn Error>> {
    let dir = tempfile::tempdir()?;
    let store = Store::open(dir.path())?;
    let gateway = Gateway::mock(4, store.assets().clone());
    let engine = Engine::new(Agents::new(gateway, TemplateSet::builtin()), Arc::new(SteppingClock::default()), "storyteller");
    let mut parent = principal("parent-1", Role::ParentViewer, PARENT);
    let build = |parent: &Principal| -> Result<Principals, Box<dyn Error>> {
        Ok(Principals::new(vec![
            principal("teacher", Role::Expert, EXPERT),
            principal("device-1", Role::Device, DEVICE),
            parent.clone(),
        ])?)
    };
    let options = ServiceOptions { auto_advance: false, ..Default::default() };
    let app = router(AppState::new(store, engine, build(&parent)?, options.clone()));

    let (status, outline) = call(&app, Method::POST, "/outlines", EXPERT,
        Some(json!({ "brief": "wants to join games but fears rejection; girl protagonist" }))).await;
    println!("POST /outlines -> {status}: {}", outline["title"]);
    let oid = outline["outline_id"].as_str().unwrap_or_default().to_string();
    for (valence, plot) in [("positive", "She asks to join and is welcomed."), ("negative", "She walks away, and a friend comes to find her.")] {
        let (status, _) = call(&app, Method::POST, &format!("/outlines/{oid}/chapters/3/branches"), EXPERT,
            Some(json!({ "valence": valence, "setting": "The playground", "plot": plot }))).await;
        println!("add {valence} branch -> {status}");
    }
    let (status, task) = call(&app, Method::POST, "/tasks", EXPERT, Some(json!({ "outline_id": oid, "child_label": "C11" }))).await;
    println!("POST /tasks -> {status}");
    let (status, _) = call(&app, Method::PATCH, &format!("/outlines/{oid}/chapters/1"), EXPERT, Some(json!({ "plot": "late edit" }))).await;
    println!("edit after deploy -> {status}");
    assert_eq!(status, StatusCode::CONFLICT);

    let (_, pending) = call(&app, Method::GET, "/tasks/pending", DEVICE, None).await;
    println!("device sees {} pending task(s)", pending["tasks"].as_array().map_or(0, Vec::len));
    let (status, session) = call(&app, Method::POST, "/sessions", DEVICE, Some(json!({ "task_id": task["task_id"], "seed": 4 }))).await;
    let sid = session["session_id"].as_str().unwrap_or_default().to_string();
    println!("POST /sessions -> {status} {sid}");

    let png = std::fs::read(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/corpus/c11/drawing.png"))?;
    println!("drawing -> {}", upload_drawing(&app, &sid, &png, "Blue").await);
    call(&app, Method::POST, &format!("/sessions/{sid}/character/accept"), DEVICE, None).await;

    let answers = ["Blue walks over and asks, can I play with you?", "Blue plays the game together with them and laughs.",
        "Blue goes back to her seat and plays alone.", "Blue tells her friend she wants to play with her every day."];
    for (i, text) in answers.iter().enumerate() {
        let k = i + 1;
        let body = json!({ "k": k, "text": text, "idempotency_key": format!("c11-{k}") });
        let (status, receipt) = call(&app, Method::POST, &format!("/sessions/{sid}/responses"), DEVICE, Some(body.clone())).await;
        let (_, again) = call(&app, Method::POST, &format!("/sessions/{sid}/responses"), DEVICE, Some(body)).await;
        println!("response {k} -> {status} {}, redelivery -> {}", receipt["outcome"], again["outcome"]);
        if k == 3 {
            let (status, _) = call(&app, Method::POST, &format!("/sessions/{sid}/branch-override"), EXPERT,
                Some(json!({ "k": 3, "branch_id": "positive" }))).await;
            println!("teacher override -> {status}");
        }
        let (_, state) = call(&app, Method::POST, &format!("/sessions/{sid}/advance"), DEVICE, None).await;
        println!("  state {}", state["state"]);
    }
    call(&app, Method::POST, &format!("/sessions/{sid}/comments"), EXPERT,
        Some(json!({ "k": 3, "text": "She withdrew here; talk about what felt scary." }))).await;

    let (status, _) = call(&app, Method::GET, &format!("/sessions/{sid}/export?variant=annotated&format=plain_text"), PARENT, None).await;
    println!("parent before sharing -> {status}");
    assert_eq!(status, StatusCode::FORBIDDEN);

    // Sharing is a token-file change; rebuild the service over the same data.
    parent.shared_sessions.push(sid.as_str().into());
    let store = Store::open(dir.path())?;
    let gateway = Gateway::mock(4, store.assets().clone());
    let engine = Engine::new(Agents::new(gateway, TemplateSet::builtin()), Arc::new(SteppingClock::default()), "storyteller");
    let app = router(AppState::new(store, engine, build(&parent)?, options));
    let (status, book) = call(&app, Method::GET, &format!("/sessions/{sid}/export?variant=annotated&format=plain_text"), PARENT, None).await;
    println!("parent after sharing -> {status}");
    let book = book.as_str().unwrap_or_default();
    assert!(book.contains("talk about what felt scary"));
    println!("{}", book.lines().take(12).collect::<Vec<_>>().join("\n"));
    Ok(())
}

pub fn run_example() -> Result<(), Box<dyn Error>> {
    tokio::runtime::Runtime::new()?.block_on(walkthrough())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
