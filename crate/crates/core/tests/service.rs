use std::time::{Duration, Instant};

use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use serde_json::{json, Value};

use taleweave::service::{Role, ServiceOptions};

mod support;
use support::{
    app, call, case, default_principals, deploy, drawing_png, manual, principal, send, seed_outline, start,
    upload_drawing, Reply, DEVICE, EXPERT, PARENT,
};

fn state_of(r: &Reply) -> (String, Option<u64>) {
    let s = if r.body.get("session").is_some() { &r.body["session"]["state"] } else { &r.body["state"] };
    (s["state"].as_str().unwrap_or_default().to_string(), s["k"].as_u64())
}

async fn ready_session(app: &axum::Router, outline: &str, seed: u64) -> String {
    let task = deploy(app, outline, "child").await;
    let sid = start(app, &task, seed).await;
    assert_eq!(upload_drawing(app, &sid, DEVICE, &drawing_png(), "Bunny").await.status, StatusCode::CREATED);
    let accepted = call(app, Method::POST, &format!("/sessions/{sid}/character/accept"), DEVICE, None).await;
    assert_eq!(accepted.status, StatusCode::OK, "{}", accepted.body);
    sid
}

async fn respond(app: &axum::Router, sid: &str, k: u8, text: &str) -> Reply {
    call(app, Method::POST, &format!("/sessions/{sid}/responses"), DEVICE, Some(json!({ "k": k, "text": text }))).await
}

#[tokio::test]
async fn manual_session_runs_to_an_exported_book() {
    let data = tempfile::tempdir().unwrap();
    seed_outline(data.path(), &case(1).outline);
    let app = app(data.path(), default_principals(), manual());
    let sid = ready_session(&app, "out_c1", 3).await;
    for (i, text) in case(1).script.responses.iter().enumerate() {
        let k = i as u8 + 1;
        let r = respond(&app, &sid, k, text).await;
        assert_eq!(r.status, StatusCode::ACCEPTED, "{}", r.body);
        assert_eq!(r.body["outcome"], "recorded");
        let adv = call(&app, Method::POST, &format!("/sessions/{sid}/advance"), DEVICE, None).await;
        assert_eq!(adv.status, StatusCode::OK, "{}", adv.body);
    }
    let done = call(&app, Method::GET, &format!("/sessions/{sid}/state"), EXPERT, None).await;
    assert_eq!(state_of(&done).0, "complete");
    assert_eq!(done.body["chapters"].as_array().unwrap().len(), 4);
    let req = Request::get(format!("/sessions/{sid}/export?variant=annotated&format=plain_text"))
        .header("authorization", format!("Bearer {EXPERT}"))
        .body(Body::empty())
        .unwrap();
    let book = send(&app, req).await;
    assert_eq!(book.status, StatusCode::OK);
    assert!(book.headers["content-type"].to_str().unwrap().starts_with("text/plain"));
    assert!(book.body.as_str().unwrap().contains(&case(1).script.responses[0]));
    assert!(data.path().join("exports").join(&sid).join("annotated.txt").is_file());
    let pending = call(&app, Method::GET, "/tasks/pending", DEVICE, None).await;
    assert_eq!(pending.body["tasks"].as_array().map(Vec::len).unwrap_or(0), 0, "{}", pending.body);
}

#[tokio::test]
async fn auto_advance_reaches_completion_by_long_polling() {
    let data = tempfile::tempdir().unwrap();
    seed_outline(data.path(), &case(2).outline);
    let app = app(data.path(), default_principals(), ServiceOptions::default());
    let sid = ready_session(&app, "out_c2", 4).await;
    let deadline = Instant::now() + Duration::from_secs(30);
    let mut k = 1u8;
    while k <= 4 {
        assert!(Instant::now() < deadline, "stuck at milestone {k}");
        let r = respond(&app, &sid, k, &case(2).script.responses[usize::from(k) - 1]).await;
        let seq = r.body["session"]["last_seq"].as_u64().unwrap();
        let polled = call(&app, Method::GET, &format!("/sessions/{sid}/state?after={seq}&wait=5"), DEVICE, None).await;
        let (state, at) = state_of(&polled);
        match state.as_str() {
            "awaiting_response" if at == Some(u64::from(k) + 1) => k += 1,
            "reflecting" | "complete" if k == 4 => break,
            _ => tokio::time::sleep(Duration::from_millis(20)).await,
        }
    }
    loop {
        let polled = call(&app, Method::GET, &format!("/sessions/{sid}/state"), DEVICE, None).await;
        if state_of(&polled).0 == "complete" {
            assert!(polled.body["has_analysis"].as_bool().unwrap());
            break;
        }
        assert!(Instant::now() < deadline, "never completed");
        tokio::time::sleep(Duration::from_millis(20)).await;
    }
}

#[tokio::test]
async fn long_poll_returns_after_its_wait_when_nothing_happens() {
    let data = tempfile::tempdir().unwrap();
    seed_outline(data.path(), &case(3).outline);
    let app = app(data.path(), default_principals(), manual());
    let sid = ready_session(&app, "out_c3", 5).await;
    let now = call(&app, Method::GET, &format!("/sessions/{sid}/state"), DEVICE, None).await;
    let seq = now.body["last_seq"].as_u64().unwrap();
    let started = Instant::now();
    let held = call(&app, Method::GET, &format!("/sessions/{sid}/state?after={seq}&wait=1"), DEVICE, None).await;
    assert_eq!(held.status, StatusCode::OK);
    assert!(started.elapsed() >= Duration::from_millis(900));
    assert_eq!(held.body["last_seq"].as_u64(), Some(seq));
    let past = call(&app, Method::GET, &format!("/sessions/{sid}/state?after=0&wait=30"), DEVICE, None).await;
    assert_eq!(past.body["last_seq"].as_u64(), Some(seq));
}

#[tokio::test]
async fn idempotency_key_in_header_or_body() {
    let data = tempfile::tempdir().unwrap();
    seed_outline(data.path(), &case(4).outline);
    let app = app(data.path(), default_principals(), manual());
    let sid = ready_session(&app, "out_c4", 6).await;
    let uri = format!("/sessions/{sid}/responses");
    let with_header = |text: &str| {
        Request::post(&uri)
            .header("authorization", format!("Bearer {DEVICE}"))
            .header("content-type", "application/json")
            .header("idempotency-key", "hdr-1")
            .body(Body::from(json!({ "k": 1, "text": text }).to_string()))
            .unwrap()
    };
    assert_eq!(send(&app, with_header("I ask for help.")).await.body["outcome"], "recorded");
    assert_eq!(send(&app, with_header("Something else.")).await.body["outcome"], "duplicate");
    call(&app, Method::POST, &format!("/sessions/{sid}/advance"), DEVICE, None).await;
    let body = json!({ "k": 2, "text": "I try again.", "idempotency_key": "body-1" });
    assert_eq!(call(&app, Method::POST, &uri, DEVICE, Some(body.clone())).await.body["outcome"], "recorded");
    assert_eq!(call(&app, Method::POST, &uri, DEVICE, Some(body)).await.body["outcome"], "duplicate");
    let s = call(&app, Method::GET, &format!("/sessions/{sid}/state"), DEVICE, None).await;
    assert_eq!(s.body["milestones"][0]["response_text"], "I ask for help.");
}

#[tokio::test]
async fn blank_answers_are_reasked() {
    let data = tempfile::tempdir().unwrap();
    seed_outline(data.path(), &case(5).outline);
    let app = app(data.path(), default_principals(), manual());
    let sid = ready_session(&app, "out_c5", 7).await;
    let r = respond(&app, &sid, 1, "  ").await;
    assert_eq!((r.status, r.body["outcome"].clone(), r.body["reasks"].clone()), (StatusCode::OK, json!("reasked"), json!(1)));
    let wrong = respond(&app, &sid, 3, "too early").await;
    assert_eq!(wrong.status, StatusCode::CONFLICT);
    assert_eq!(wrong.body["code"], "wrong_milestone", "{}", wrong.body);
    let both = call(&app, Method::POST, &format!("/sessions/{sid}/responses"), DEVICE, Some(json!({ "k": 1 }))).await;
    assert_eq!(both.status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn outline_edits_honour_versions_and_deployment() {
    let data = tempfile::tempdir().unwrap();
    seed_outline(data.path(), &case(6).outline);
    let app = app(data.path(), default_principals(), manual());
    let patch = |tag: &str| {
        Request::patch("/outlines/out_c6/chapters/1")
            .header("authorization", format!("Bearer {EXPERT}"))
            .header("content-type", "application/json")
            .header("if-match", tag)
            .body(Body::from(json!({ "plot": "The rain starts at recess." }).to_string()))
            .unwrap()
    };
    let stale = send(&app, patch("\"7\"")).await;
    assert_eq!(stale.status, StatusCode::PRECONDITION_FAILED, "{}", stale.body);
    let ok = send(&app, patch("\"1\"")).await;
    assert_eq!(ok.status, StatusCode::OK, "{}", ok.body);
    assert_eq!(ok.body["version"], 2);
    assert_eq!(ok.body["chapters"][0]["plot"], "The rain starts at recess.");
    deploy(&app, "out_c6", "C6").await;
    let late = send(&app, patch("\"2\"")).await;
    assert_eq!((late.status, late.body["code"].clone()), (StatusCode::CONFLICT, json!("edit_after_deploy")));
    let branch = call(
        &app,
        Method::POST,
        "/outlines/out_c6/chapters/2/branches",
        EXPERT,
        Some(json!({ "valence": "neutral", "setting": "Hall", "plot": "Waits." })),
    )
    .await;
    assert_eq!(branch.status, StatusCode::CONFLICT);
}

#[tokio::test]
async fn uploads_are_checked_for_size_and_type() {
    let data = tempfile::tempdir().unwrap();
    seed_outline(data.path(), &case(7).outline);
    let small = ServiceOptions { max_upload_bytes: 64, ..manual() };
    let app = app(data.path(), default_principals(), small);
    let task = deploy(&app, "out_c7", "C7").await;
    let sid = start(&app, &task, 8).await;
    let big = upload_drawing(&app, &sid, DEVICE, &drawing_png(), "Pip").await;
    assert_eq!(big.status, StatusCode::PAYLOAD_TOO_LARGE, "{}", big.body);

    let (_, body) = support::multipart(&[("image", Some("d.png"), b"GIF89a"), ("name", None, b"Pip")]);
    let body = String::from_utf8(body).unwrap().replace("image/png", "image/gif");
    let req = Request::post(format!("/sessions/{sid}/drawing"))
        .header("authorization", format!("Bearer {DEVICE}"))
        .header("content-type", "multipart/form-data; boundary=taleweave-test-boundary")
        .body(Body::from(body))
        .unwrap();
    let gif = send(&app, req).await;
    assert_eq!(gif.status, StatusCode::UNSUPPORTED_MEDIA_TYPE, "{}", gif.body);
    assert!(gif.body["detail"]["allowed"].as_array().unwrap().contains(&json!("image/png")));

    let audio = json!({ "k": 1, "audio": "AAAA", "audio_mime": "audio/ogg" });
    let r = call(&app, Method::POST, &format!("/sessions/{sid}/responses"), DEVICE, Some(audio)).await;
    assert_eq!(r.status, StatusCode::UNSUPPORTED_MEDIA_TYPE);
}

#[tokio::test]
async fn sessions_are_visible_only_to_their_device_and_sharing_parents() {
    let data = tempfile::tempdir().unwrap();
    seed_outline(data.path(), &case(8).outline);
    let first = app(data.path(), default_principals(), manual());
    let sid = ready_session(&first, "out_c8", 9).await;
    for (i, text) in case(8).script.responses.iter().enumerate() {
        respond(&first, &sid, i as u8 + 1, text).await;
        call(&first, Method::POST, &format!("/sessions/{sid}/advance"), DEVICE, None).await;
    }
    drop(first);

    let mut principals = default_principals();
    principals.push(principal("device-2", Role::Device, "device-token-0002"));
    principals.push(principal("parent-2", Role::ParentViewer, "parent-token-0002"));
    principals[2].shared_sessions.push(sid.as_str().into());
    let app = app(data.path(), principals, manual());

    let state = format!("/sessions/{sid}/state");
    assert_eq!(call(&app, Method::GET, &state, DEVICE, None).await.status, StatusCode::OK);
    assert_eq!(call(&app, Method::GET, &state, "device-token-0002", None).await.status, StatusCode::FORBIDDEN);

    let annotated = format!("/sessions/{sid}/export?variant=annotated&format=plain_text");
    let print = format!("/sessions/{sid}/export?variant=print&format=plain_text");
    assert_eq!(call(&app, Method::GET, &annotated, PARENT, None).await.status, StatusCode::OK);
    assert_eq!(call(&app, Method::GET, &print, PARENT, None).await.status, StatusCode::FORBIDDEN);
    assert_eq!(call(&app, Method::GET, &annotated, "parent-token-0002", None).await.status, StatusCode::FORBIDDEN);
    assert_eq!(call(&app, Method::GET, &state, PARENT, None).await.status, StatusCode::FORBIDDEN);

    let missing = call(&app, Method::GET, "/sessions/ses_nope/state", EXPERT, None).await;
    assert_eq!(missing.status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn requests_without_credentials_are_unauthorised() {
    let data = tempfile::tempdir().unwrap();
    let app = app(data.path(), default_principals(), manual());
    let bare = send(&app, support::request(Method::GET, "/outlines", None, None)).await;
    assert_eq!(bare.status, StatusCode::UNAUTHORIZED);
    let wrong = call(&app, Method::GET, "/outlines", "nobody", None).await;
    assert_eq!(wrong.status, StatusCode::UNAUTHORIZED);
    let basic = Request::get("/outlines").header("authorization", "Basic Zm9vOmJhcg==").body(Body::empty()).unwrap();
    assert_eq!(send(&app, basic).await.status, StatusCode::UNAUTHORIZED);
}

#[tokio::test]
async fn state_survives_a_restart() {
    let data = tempfile::tempdir().unwrap();
    seed_outline(data.path(), &case(9).outline);
    let first = app(data.path(), default_principals(), manual());
    let sid = ready_session(&first, "out_c9", 10).await;
    respond(&first, &sid, 1, &case(9).script.responses[0]).await;
    let before: Value = call(&first, Method::GET, &format!("/sessions/{sid}/state"), EXPERT, None).await.body;
    drop(first);
    let second = app(data.path(), default_principals(), manual());
    let after = call(&second, Method::GET, &format!("/sessions/{sid}/state"), EXPERT, None).await.body;
    assert_eq!(before, after);
    let adv = call(&second, Method::POST, &format!("/sessions/{sid}/advance"), DEVICE, None).await;
    assert_eq!(state_of(&adv), ("awaiting_response".into(), Some(2)));
}
