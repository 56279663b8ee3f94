use std::sync::Arc;
use std::time::Duration;

use axum::body::Bytes;
use axum::extract::{Multipart, Path, Query, State};
use axum::http::{HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::Extension;
use base64::Engine as _;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::json;
use sha2::{Digest, Sha256};

use super::auth::{Principal, Role};
use super::{ApiError, AppState, SessionSlot, StoreError};
use crate::assets::AssetRef;
use crate::canon;
use crate::domain::{
    validate_revision, BranchId, BranchSpec, CharacterProfile, Milestone,
    OutlineId, Session, SessionId, SessionState, StoryOutline, TaskId, TeacherComment, Valence,
    CHAPTER_COUNT,
};
use crate::session::{ResponseInput, ResponseOutcome, SessionError, SessionTask};
use crate::storybook::{self, ExportFormat, Variant};

type ApiResult = Result<Response, ApiError>;

const DRAWING_MIME: [(&str, &str); 2] = [("image/png", "png"), ("image/jpeg", "jpg")];
const AUDIO_MIME: [(&str, &str); 2] = [("audio/wav", "wav"), ("audio/x-wav", "wav")];

fn document<T: Serialize>(status: StatusCode, kind: &str, value: &T) -> ApiResult {
    let body = canon::to_document(kind, value).map_err(|e| ApiError::internal(e.to_string()))?;
    Ok((status, [("content-type", "application/json")], body).into_response())
}

fn parse_body<T: DeserializeOwned>(body: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| ApiError::bad_request(format!("malformed body: {e}")))
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> T + Send + 'static) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f).await.map_err(|e| ApiError::internal(e.to_string()))
}

fn store_error(e: StoreError) -> ApiError {
    match e {
        StoreError::VersionConflict { .. } => {
            ApiError::new(StatusCode::PRECONDITION_FAILED, "version_mismatch", e.to_string())
        }
        other => ApiError::internal(other.to_string()),
    }
}

fn log_error(e: crate::session::LogError) -> ApiError {
    ApiError::from(SessionError::Log(e))
}

fn now(state: &AppState) -> crate::domain::Timestamp {
    state.engine().clock().now()
}

fn fresh_id(state: &AppState, prefix: &str) -> String {
    crate::domain::new_id(prefix, now(state), &mut rand::rng())
}

// ---------------------------------------------------------------- outlines

#[derive(Deserialize)]
pub(super) struct CreateOutline {
    brief: String,
    #[serde(default)]
    child_note: String,
}

pub(super) async fn list_outlines(State(state): State<AppState>) -> ApiResult {
    document(StatusCode::OK, "outline_list", &json!({ "outlines": state.store().outlines() }))
}

pub(super) async fn create_outline(State(state): State<AppState>, body: Bytes) -> ApiResult {
    let req: CreateOutline = parse_body(&body)?;
    if req.brief.trim().is_empty() {
        return Err(ApiError::bad_request("brief is empty"));
    }
    let id = OutlineId::new(fresh_id(&state, "out"));
    let st = state.clone();
    let outline = blocking(move || {
        let (outline, _) = st.engine().agents().outline(id, &req.brief, &req.child_note, now(&st))?;
        st.store().put_outline(outline.clone(), None).map_err(store_error)?;
        Ok::<_, ApiError>(outline)
    })
    .await??;
    document(StatusCode::CREATED, crate::domain::OUTLINE_DOCUMENT, &outline)
}

fn load_outline(state: &AppState, id: &str) -> Result<StoryOutline, ApiError> {
    state.store().outline(&OutlineId::new(id)).ok_or_else(|| ApiError::not_found(format!("outline {id}")))
}

pub(super) async fn get_outline(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult {
    document(StatusCode::OK, crate::domain::OUTLINE_DOCUMENT, &load_outline(&state, &id)?)
}

fn editable(outline: &StoryOutline, headers: &HeaderMap) -> Result<(), ApiError> {
    if outline.is_deployed() {
        return Err(ApiError::new(
            StatusCode::CONFLICT,
            "edit_after_deploy",
            format!("outline {} version {} is deployed", outline.outline_id, outline.version),
        ));
    }
    if let Some(tag) = headers.get("if-match") {
        let tag = tag.to_str().unwrap_or("").trim().trim_matches('"');
        if tag != outline.version.to_string() {
            return Err(ApiError::new(
                StatusCode::PRECONDITION_FAILED,
                "version_mismatch",
                format!("If-Match {tag} but outline is at version {}", outline.version),
            ));
        }
    }
    Ok(())
}

fn chapter_index(k: u8) -> Result<u8, ApiError> {
    if (1..=CHAPTER_COUNT as u8).contains(&k) {
        Ok(k)
    } else {
        Err(ApiError::bad_request(format!("chapter {k} is outside 1..{CHAPTER_COUNT}")))
    }
}

fn check_revision(previous: &StoryOutline, next: &StoryOutline) -> Result<(), ApiError> {
    let result = validate_revision(previous, next);
    if result.is_ok() {
        return Ok(());
    }
    Err(ApiError::new(StatusCode::BAD_REQUEST, "invalid_outline", "outline violates validation rules")
        .with_detail(json!({ "violations": result.violations })))
}

#[derive(Deserialize)]
pub(super) struct EditChapter {
    setting: Option<String>,
    plot: Option<String>,
    ai_instruction: Option<String>,
}

pub(super) async fn edit_chapter(
    State(state): State<AppState>,
    Path((id, k)): Path<(String, u8)>,
    headers: HeaderMap,
    body: Bytes,
) -> ApiResult {
    let req: EditChapter = parse_body(&body)?;
    let k = chapter_index(k)?;
    let outline = load_outline(&state, &id)?;
    editable(&outline, &headers)?;
    if req.setting.is_none() && req.plot.is_none() && req.ai_instruction.is_none() {
        return Err(ApiError::bad_request("nothing to change: give setting, plot or ai_instruction"));
    }
    let st = state.clone();
    let next = blocking(move || {
        let at = now(&st);
        let mut next = outline.edited(at, |o| {
            let chapter = &mut o.chapters[usize::from(k) - 1];
            if let Some(setting) = req.setting {
                chapter.setting = setting;
            }
            if let Some(plot) = req.plot {
                chapter.plot = plot;
            }
        });
        if let Some(instruction) = req.ai_instruction {
            let (rewritten, _) = st.engine().agents().rewrite_chapter(&next, k, &instruction, at)?;
            next = StoryOutline { version: next.version, ..rewritten };
        }
        check_revision(&outline, &next)?;
        st.store().put_outline(next.clone(), Some(outline.version)).map_err(store_error)?;
        Ok::<_, ApiError>(next)
    })
    .await??;
    document(StatusCode::OK, crate::domain::OUTLINE_DOCUMENT, &next)
}

#[derive(Deserialize)]
pub(super) struct AddBranch {
    branch_id: Option<String>,
    valence: String,
    setting: String,
    plot: String,
}

pub(super) async fn add_branch(
    State(state): State<AppState>,
    Path((id, k)): Path<(String, u8)>,
    headers: HeaderMap,
    body: Bytes,
) -> ApiResult {
    let req: AddBranch = parse_body(&body)?;
    let k = chapter_index(k)?;
    let outline = load_outline(&state, &id)?;
    editable(&outline, &headers)?;
    let valence = Valence::parse(&req.valence)
        .ok_or_else(|| ApiError::bad_request(format!("unknown valence {:?}", req.valence)))?;
    let chapter = &outline.chapters[usize::from(k) - 1];
    let branch_id = match req.branch_id {
        Some(id) => BranchId::new(id.trim()),
        None => {
            let base = valence.as_str();
            let taken = |id: &str| chapter.branches.iter().any(|b| b.branch_id.as_str() == id);
            let id = (1..)
                .map(|n| if n == 1 { base.to_string() } else { format!("{base}-{n}") })
                .find(|id| !taken(id))
                .expect("unbounded");
            BranchId::new(id)
        }
    };
    let next = outline.edited(now(&state), |o| {
        o.chapters[usize::from(k) - 1].branches.push(BranchSpec {
            branch_id,
            valence,
            setting: req.setting.trim().to_string(),
            plot: req.plot.trim().to_string(),
        });
    });
    check_revision(&outline, &next)?;
    state.store().put_outline(next.clone(), Some(outline.version)).map_err(store_error)?;
    document(StatusCode::CREATED, crate::domain::OUTLINE_DOCUMENT, &next)
}

// ---------------------------------------------------------------- tasks

#[derive(Deserialize)]
pub(super) struct DeployTask {
    outline_id: String,
    child_label: String,
}

pub(super) async fn deploy_task(State(state): State<AppState>, body: Bytes) -> ApiResult {
    let req: DeployTask = parse_body(&body)?;
    let outline = load_outline(&state, &req.outline_id)?;
    let task_id = TaskId::new(fresh_id(&state, "tsk"));
    let task = SessionTask::deploy(task_id, &outline, &req.child_label, now(&state)).map_err(|v| {
        ApiError::new(StatusCode::BAD_REQUEST, "invalid_outline", "outline violates validation rules")
            .with_detail(json!({ "violations": v.violations }))
    })?;
    if !outline.is_deployed() {
        state.store().put_outline(outline.deployed(), Some(outline.version)).map_err(store_error)?;
    }
    state.store().add_task(task.clone()).map_err(store_error)?;
    document(StatusCode::CREATED, crate::session::TASK_DOCUMENT, &task)
}

pub(super) async fn pending_tasks(State(state): State<AppState>) -> ApiResult {
    document(StatusCode::OK, "task_list", &json!({ "tasks": state.store().board().pending() }))
}

// ---------------------------------------------------------------- sessions

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChapterView {
    pub index: u8,
    pub paragraphs: Vec<String>,
    pub panel_image: AssetRef,
    pub branch: Option<BranchId>,
}

/// What `GET /sessions/{id}/state` returns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionView {
    pub session_id: SessionId,
    pub task_id: TaskId,
    pub child_label: String,
    pub state: SessionState,
    pub last_seq: u64,
    pub character: Option<CharacterProfile>,
    pub character_accepted: bool,
    pub milestones: Vec<Milestone>,
    pub chapters: Vec<ChapterView>,
    pub reflection: Option<String>,
    pub has_analysis: bool,
    pub teacher_comments: Vec<TeacherComment>,
    pub consecutive_failures: u32,
    pub abort_reason: Option<String>,
}

pub const SESSION_VIEW_DOCUMENT: &str = "session_state";

impl From<&Session> for SessionView {
    fn from(s: &Session) -> Self {
        Self {
            session_id: s.session_id.clone(),
            task_id: s.task_id.clone(),
            child_label: s.child_label.clone(),
            state: s.state,
            last_seq: s.last_seq(),
            character: s.character.clone(),
            character_accepted: s.character_accepted,
            milestones: s.milestones.clone(),
            chapters: s
                .chapters
                .iter()
                .map(|c| ChapterView {
                    index: c.index,
                    paragraphs: c.paragraphs.clone(),
                    panel_image: c.panel_image.clone(),
                    branch: c.branch.clone(),
                })
                .collect(),
            reflection: s.reflection.clone(),
            has_analysis: s.analysis.is_some(),
            teacher_comments: s.teacher_comments.clone(),
            consecutive_failures: s.consecutive_failures,
            abort_reason: s.abort_reason.clone(),
        }
    }
}

fn view(status: StatusCode, session: &Session) -> ApiResult {
    document(status, SESSION_VIEW_DOCUMENT, &SessionView::from(session))
}

/// Looks up a session and applies the per-resource rules: devices see only
/// sessions they claimed, parent viewers only sessions shared with them.
fn session_for(state: &AppState, who: &Principal, id: &str) -> Result<Arc<SessionSlot>, ApiError> {
    let sid = SessionId::new(id);
    let slot = state.store().session(&sid).ok_or_else(|| ApiError::not_found(format!("session {id}")))?;
    let ok = match who.role {
        Role::Expert => true,
        Role::Device => slot.snapshot().claimed_by.as_deref() == Some(who.principal_id.as_str()),
        Role::ParentViewer => who.shared_sessions.contains(&sid),
    };
    if ok {
        Ok(slot)
    } else {
        Err(ApiError::forbidden(format!("session {id} is not accessible to {}", who.principal_id)))
    }
}

/// Marks the task done once its session reaches a terminal state.
fn settle_task(state: &AppState, session: &Session) {
    if session.state.is_terminal() {
        state.store().board().finish(&session.task_id);
        if let Err(e) = state.store().save_task(&session.task_id) {
            tracing::warn!(error = %e, "could not persist task status");
        }
    }
}

pub(super) async fn list_sessions(State(state): State<AppState>) -> ApiResult {
    let views: Vec<SessionView> =
        state.store().sessions().iter().map(|s| SessionView::from(&*s.snapshot())).collect();
    document(StatusCode::OK, "session_list", &json!({ "sessions": views }))
}

#[derive(Deserialize)]
pub(super) struct StartSession {
    task_id: String,
    seed: Option<u64>,
}

pub(super) async fn start_session(
    State(state): State<AppState>,
    Extension(who): Extension<Principal>,
    body: Bytes,
) -> ApiResult {
    let req: StartSession = parse_body(&body)?;
    let task_id = TaskId::new(req.task_id);
    let seed = req.seed.unwrap_or_else(|| {
        let d = Sha256::digest(task_id.as_str().as_bytes());
        u64::from_le_bytes(d[..8].try_into().expect("8 bytes"))
    });
    let st = state.clone();
    let session = blocking(move || {
        let session = st.engine().start_session(st.store().board(), &task_id, seed, &who.principal_id)?;
        st.store().save_task(&task_id).map_err(store_error)?;
        let slot = st.store().insert_session(session).map_err(store_error)?;
        Ok::<_, ApiError>(slot.snapshot())
    })
    .await??;
    view(StatusCode::CREATED, &session)
}

pub(super) async fn submit_drawing(
    State(state): State<AppState>,
    Extension(who): Extension<Principal>,
    Path(id): Path<String>,
    mut multipart: Multipart,
) -> ApiResult {
    let slot = session_for(&state, &who, &id)?;
    let mut image = None;
    let mut name = None;
    while let Some(field) =
        multipart.next_field().await.map_err(|e| ApiError::bad_request(e.to_string()))?
    {
        match field.name() {
            Some("image") => {
                let mime = field.content_type().unwrap_or("").to_string();
                let ext = DRAWING_MIME
                    .iter()
                    .find(|(m, _)| *m == mime)
                    .map(|(_, e)| *e)
                    .ok_or_else(|| unsupported(&mime, &DRAWING_MIME))?;
                let bytes = field.bytes().await.map_err(|e| ApiError::bad_request(e.to_string()))?;
                image = Some((bytes, ext));
            }
            Some("name") => {
                name = Some(field.text().await.map_err(|e| ApiError::bad_request(e.to_string()))?)
            }
            _ => {}
        }
    }
    let (bytes, ext) = image.ok_or_else(|| ApiError::bad_request("multipart field \"image\" is required"))?;
    let name = name.ok_or_else(|| ApiError::bad_request("multipart field \"name\" is required"))?;
    check_size(&state, bytes.len())?;
    let drawing = state.store().assets().put(&bytes, ext).map_err(|e| ApiError::internal(e.to_string()))?;
    let st = state.clone();
    let profile = blocking(move || {
        slot.mutate(|s| st.engine().submit_drawing(s, drawing, &name)).map_err(log_error)?.map_err(ApiError::from)
    })
    .await??;
    document(StatusCode::CREATED, "character_profile", &profile)
}

fn unsupported(mime: &str, allowed: &[(&str, &str)]) -> ApiError {
    let list: Vec<&str> = allowed.iter().map(|(m, _)| *m).collect();
    ApiError::new(StatusCode::UNSUPPORTED_MEDIA_TYPE, "unsupported_media", format!("{mime:?} is not accepted"))
        .with_detail(json!({ "allowed": list }))
}

fn check_size(state: &AppState, len: usize) -> Result<(), ApiError> {
    let max = state.0.options.max_upload_bytes;
    if len > max {
        return Err(ApiError::new(
            StatusCode::PAYLOAD_TOO_LARGE,
            "too_large",
            format!("upload of {len} bytes exceeds {max}"),
        ));
    }
    Ok(())
}

pub(super) async fn accept_character(
    State(state): State<AppState>,
    Extension(who): Extension<Principal>,
    Path(id): Path<String>,
) -> ApiResult {
    let slot = session_for(&state, &who, &id)?;
    let st = state.clone();
    let session = blocking(move || {
        slot.mutate(|s| st.engine().accept_character(s)).map_err(log_error)?.map_err(ApiError::from)?;
        Ok::<_, ApiError>(slot.snapshot())
    })
    .await??;
    view(StatusCode::OK, &session)
}

#[derive(Deserialize)]
pub(super) struct SubmitResponse {
    k: u8,
    text: Option<String>,
    /// Base64-encoded audio.
    audio: Option<String>,
    audio_mime: Option<String>,
    idempotency_key: Option<String>,
}

#[derive(Serialize)]
struct ResponseReceipt {
    outcome: &'static str,
    reasks: Option<u8>,
    session: SessionView,
}

/// Drives generation until it succeeds, aborts, or there is nothing to do.
fn run_generation(state: &AppState, slot: &SessionSlot) {
    loop {
        let step = slot.mutate(|s| {
            if matches!(s.state, SessionState::GeneratingChapter(_) | SessionState::Reflecting) {
                Some(state.engine().advance_generation(s))
            } else {
                None
            }
        });
        match step {
            Ok(Some(Err(SessionError::GenerationFailed { aborted: false, .. }))) => continue,
            Ok(Some(Err(e))) => tracing::warn!(error = %e, "generation stopped"),
            Err(e) => tracing::error!(error = %e, "could not persist session log"),
            Ok(_) => {}
        }
        break;
    }
    settle_task(state, &slot.snapshot());
}

pub(super) async fn submit_response(
    State(state): State<AppState>,
    Extension(who): Extension<Principal>,
    Path(id): Path<String>,
    headers: HeaderMap,
    body: Bytes,
) -> ApiResult {
    let slot = session_for(&state, &who, &id)?;
    let req: SubmitResponse = parse_body(&body)?;
    let key = headers
        .get("idempotency-key")
        .and_then(|v| v.to_str().ok())
        .map(str::to_string)
        .or(req.idempotency_key);
    let input = match (req.text, req.audio) {
        (Some(text), None) => ResponseInput::Typed(text),
        (None, Some(b64)) => {
            let mime = req.audio_mime.unwrap_or_else(|| "audio/wav".into());
            let ext = AUDIO_MIME
                .iter()
                .find(|(m, _)| *m == mime)
                .map(|(_, e)| *e)
                .ok_or_else(|| unsupported(&mime, &AUDIO_MIME))?;
            let bytes = base64::engine::general_purpose::STANDARD
                .decode(b64.trim())
                .map_err(|e| ApiError::bad_request(format!("audio is not base64: {e}")))?;
            check_size(&state, bytes.len())?;
            let asset =
                state.store().assets().put(&bytes, ext).map_err(|e| ApiError::internal(e.to_string()))?;
            ResponseInput::Audio(asset)
        }
        _ => return Err(ApiError::bad_request("give exactly one of text or audio")),
    };
    let st = state.clone();
    let slot2 = slot.clone();
    let outcome = blocking(move || {
        slot2
            .mutate(|s| st.engine().submit_response(s, req.k, input, key.as_deref()))
            .map_err(log_error)?
            .map_err(ApiError::from)
    })
    .await??;
    if outcome == ResponseOutcome::Recorded && state.0.options.auto_advance {
        let st = state.clone();
        let slot = slot.clone();
        tokio::task::spawn_blocking(move || run_generation(&st, &slot));
    }
    let (status, label, reasks) = match outcome {
        ResponseOutcome::Recorded => (StatusCode::ACCEPTED, "recorded", None),
        ResponseOutcome::Reasked(n) => (StatusCode::OK, "reasked", Some(n)),
        ResponseOutcome::Duplicate => (StatusCode::OK, "duplicate", None),
    };
    let receipt =
        ResponseReceipt { outcome: label, reasks, session: SessionView::from(&*slot.snapshot()) };
    document(status, "response_receipt", &receipt)
}

pub(super) async fn advance(
    State(state): State<AppState>,
    Extension(who): Extension<Principal>,
    Path(id): Path<String>,
) -> ApiResult {
    let slot = session_for(&state, &who, &id)?;
    let st = state.clone();
    let session = blocking(move || {
        let result = slot.mutate(|s| st.engine().advance_generation(s)).map_err(log_error)?;
        let snapshot = slot.snapshot();
        settle_task(&st, &snapshot);
        result.map_err(ApiError::from)?;
        Ok::<_, ApiError>(snapshot)
    })
    .await??;
    view(StatusCode::OK, &session)
}

#[derive(Deserialize)]
pub(super) struct StateQuery {
    /// Hold the request until an event after this seq is committed.
    after: Option<u64>,
    /// Seconds to hold, capped by the service.
    wait: Option<u64>,
}

pub(super) async fn get_state(
    State(state): State<AppState>,
    Extension(who): Extension<Principal>,
    Path(id): Path<String>,
    Query(q): Query<StateQuery>,
) -> ApiResult {
    let slot = session_for(&state, &who, &id)?;
    if let Some(after) = q.after {
        let hold = Duration::from_secs(q.wait.unwrap_or(u64::MAX / 2)).min(state.0.options.long_poll_max);
        let mut rx = slot.subscribe();
        let _ = tokio::time::timeout(hold, rx.wait_for(|s| s.last_seq() > after)).await;
    }
    view(StatusCode::OK, &slot.snapshot())
}

#[derive(Deserialize)]
pub(super) struct OverrideBranch {
    k: u8,
    branch_id: String,
}

pub(super) async fn override_branch(
    State(state): State<AppState>,
    Extension(who): Extension<Principal>,
    Path(id): Path<String>,
    body: Bytes,
) -> ApiResult {
    let slot = session_for(&state, &who, &id)?;
    let req: OverrideBranch = parse_body(&body)?;
    let st = state.clone();
    let session = blocking(move || {
        slot.mutate(|s| {
            st.engine().override_branch(s, req.k, BranchId::new(req.branch_id), &who.principal_id)
        })
        .map_err(log_error)?
        .map_err(ApiError::from)?;
        Ok::<_, ApiError>(slot.snapshot())
    })
    .await??;
    view(StatusCode::OK, &session)
}

#[derive(Deserialize)]
pub(super) struct AddComment {
    k: u8,
    text: String,
}

pub(super) async fn add_comment(
    State(state): State<AppState>,
    Extension(who): Extension<Principal>,
    Path(id): Path<String>,
    body: Bytes,
) -> ApiResult {
    let slot = session_for(&state, &who, &id)?;
    let req: AddComment = parse_body(&body)?;
    let st = state.clone();
    let session = blocking(move || {
        slot.mutate(|s| st.engine().add_comment(s, req.k, &req.text, &who.principal_id))
            .map_err(log_error)?
            .map_err(ApiError::from)?;
        Ok::<_, ApiError>(slot.snapshot())
    })
    .await??;
    view(StatusCode::CREATED, &session)
}

#[derive(Deserialize)]
pub(super) struct ExportQuery {
    variant: Option<String>,
    format: Option<String>,
}

pub(super) async fn export(
    State(state): State<AppState>,
    Extension(who): Extension<Principal>,
    Path(id): Path<String>,
    Query(q): Query<ExportQuery>,
) -> ApiResult {
    let slot = session_for(&state, &who, &id)?;
    let variant: Variant = q.variant.as_deref().unwrap_or("print").parse()?;
    let format: ExportFormat = q.format.as_deref().unwrap_or("paginated_html").parse()?;
    let session = slot.snapshot();
    let book = storybook::compile(&session, variant)?;
    let path = storybook::export(&book, format, state.store().root())?;
    let body = std::fs::read(&path).map_err(|e| ApiError::internal(e.to_string()))?;
    let mime = match format {
        ExportFormat::Interchange => "application/json",
        ExportFormat::PaginatedHtml => "text/html; charset=utf-8",
        ExportFormat::PlainText => "text/plain; charset=utf-8",
    };
    Ok(([("content-type", mime)], body).into_response())
}

pub(super) async fn get_asset(State(state): State<AppState>, Path(file): Path<String>) -> ApiResult {
    let asset = AssetRef::parse(&format!("{}/{file}", crate::assets::ASSET_DIR))
        .map_err(|e| ApiError::bad_request(e.to_string()))?;
    let bytes = state.store().assets().read(&asset).map_err(|_| ApiError::not_found(asset.to_string()))?;
    let mime = match asset.extension() {
        Some("png") => "image/png",
        Some("jpg") => "image/jpeg",
        Some("wav") => "audio/wav",
        _ => "application/octet-stream",
    };
    Ok(([("content-type", mime)], bytes).into_response())
}
