//! HTTP service for experts, devices and parent viewers.

mod auth;
mod error;
mod handlers;
mod store;

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

use axum::extract::{DefaultBodyLimit, MatchedPath, Query, Request, State};
use axum::http::header::AUTHORIZATION;
use axum::middleware::{self, Next};
use axum::response::Response;
use axum::routing::{get, post};
use axum::Router;
use serde::Deserialize;

pub use auth::{allowed, Endpoint, Principal, Principals, Role, TokenFileError, PRINCIPALS_DOCUMENT};
pub use error::ApiError;
pub use handlers::SessionView;
pub use store::{SessionSlot, Store, StoreError};

use crate::agents::{Agents, TemplateSet};
use crate::domain::{Clock, SystemClock};
use crate::provider::{ConfigError, Gateway, ProviderConfig};
use crate::session::Engine;

pub const DEFAULT_MAX_UPLOAD: usize = 10 * 1024 * 1024;
pub const LONG_POLL_MAX: Duration = Duration::from_secs(25);

#[derive(Debug, Clone)]
pub struct ServiceOptions {
    pub max_upload_bytes: usize,
    pub long_poll_max: Duration,
    /// Run generation in the background as soon as a response is recorded.
    /// When off, the device calls `POST /sessions/{id}/advance`, which leaves
    /// a window for a branch override.
    pub auto_advance: bool,
}

impl Default for ServiceOptions {
    fn default() -> Self {
        Self { max_upload_bytes: DEFAULT_MAX_UPLOAD, long_poll_max: LONG_POLL_MAX, auto_advance: true }
    }
}

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub listen: SocketAddr,
    pub data_dir: PathBuf,
    pub provider_config: Option<PathBuf>,
    pub token_file: PathBuf,
    pub options: ServiceOptions,
}

#[derive(Debug, thiserror::Error)]
pub enum ServiceError {
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error(transparent)]
    Tokens(#[from] TokenFileError),
    #[error(transparent)]
    Provider(#[from] ConfigError),
    #[error("server I/O: {0}")]
    Io(#[from] std::io::Error),
}

pub(crate) struct Inner {
    pub(crate) store: Store,
    pub(crate) engine: Engine,
    pub(crate) principals: Principals,
    pub(crate) options: ServiceOptions,
}

/// Shared handler state.
#[derive(Clone)]
pub struct AppState(pub(crate) Arc<Inner>);

impl AppState {
    pub fn new(store: Store, engine: Engine, principals: Principals, options: ServiceOptions) -> Self {
        Self(Arc::new(Inner { store, engine, principals, options }))
    }

    /// Opens the data directory and builds the gateway from the provider
    /// config (all-mock when none is given) with `TALEWEAVE_*` overrides.
    pub fn from_config(cfg: &ServiceConfig) -> Result<Self, ServiceError> {
        let store = Store::open(&cfg.data_dir)?;
        let provider = match &cfg.provider_config {
            Some(path) => ProviderConfig::load(path)?,
            None => ProviderConfig::default(),
        }
        .from_env_overrides()?;
        let gateway = Gateway::from_config(&provider, store.assets().clone())?;
        let clock: Arc<dyn Clock> = Arc::new(SystemClock);
        let engine = Engine::new(Agents::new(gateway, TemplateSet::builtin()), clock, provider.voice_profile);
        let principals = Principals::load(&cfg.token_file)?;
        Ok(Self::new(store, engine, principals, cfg.options.clone()))
    }

    pub fn store(&self) -> &Store {
        &self.0.store
    }

    pub fn engine(&self) -> &Engine {
        &self.0.engine
    }
}

#[derive(Deserialize)]
struct VariantQuery {
    variant: Option<String>,
}

async fn authorize(
    State(state): State<AppState>,
    matched: Option<MatchedPath>,
    mut req: Request,
    next: Next,
) -> Result<Response, ApiError> {
    let token = req
        .headers()
        .get(AUTHORIZATION)
        .and_then(|v| v.to_str().ok())
        .and_then(|v| v.strip_prefix("Bearer "))
        .ok_or_else(ApiError::unauthorized)?;
    let principal =
        state.0.principals.authenticate(token.trim()).cloned().ok_or_else(ApiError::unauthorized)?;
    let pattern = matched.ok_or_else(|| ApiError::not_found("no such route"))?;
    let annotated = Query::<VariantQuery>::try_from_uri(req.uri())
        .ok()
        .and_then(|q| q.0.variant)
        .is_some_and(|v| v == "annotated");
    let endpoint = Endpoint::resolve(req.method(), pattern.as_str(), annotated)
        .ok_or_else(|| ApiError::not_found("no such route"))?;
    if !allowed(principal.role, endpoint) {
        return Err(ApiError::forbidden(format!("{} may not call {endpoint:?}", principal.role)));
    }
    req.extensions_mut().insert(principal);
    Ok(next.run(req).await)
}

pub fn router(state: AppState) -> Router {
    use handlers as h;
    let limit = state.0.options.max_upload_bytes * 4 / 3 + 64 * 1024;
    Router::new()
        .route("/outlines", get(h::list_outlines).post(h::create_outline))
        .route("/outlines/{id}", get(h::get_outline))
        .route("/outlines/{id}/chapters/{k}", axum::routing::patch(h::edit_chapter))
        .route("/outlines/{id}/chapters/{k}/branches", post(h::add_branch))
        .route("/tasks", post(h::deploy_task))
        .route("/tasks/pending", get(h::pending_tasks))
        .route("/sessions", get(h::list_sessions).post(h::start_session))
        .route("/sessions/{id}/drawing", post(h::submit_drawing))
        .route("/sessions/{id}/character/accept", post(h::accept_character))
        .route("/sessions/{id}/responses", post(h::submit_response))
        .route("/sessions/{id}/advance", post(h::advance))
        .route("/sessions/{id}/state", get(h::get_state))
        .route("/sessions/{id}/branch-override", post(h::override_branch))
        .route("/sessions/{id}/comments", post(h::add_comment))
        .route("/sessions/{id}/export", get(h::export))
        .route("/assets/{file}", get(h::get_asset))
        .route_layer(middleware::from_fn_with_state(state.clone(), authorize))
        .layer(DefaultBodyLimit::max(limit))
        .with_state(state)
}

/// Binds `cfg.listen` and serves until Ctrl-C.
pub async fn serve(cfg: ServiceConfig) -> Result<(), ServiceError> {
    let state = AppState::from_config(&cfg)?;
    let listener = tokio::net::TcpListener::bind(cfg.listen).await?;
    tracing::info!(addr = %listener.local_addr()?, data_dir = %cfg.data_dir.display(), "listening");
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}
