use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use serde::Serialize;
use serde_json::{json, Value};

use crate::agents::AgentError;
use crate::session::{Rejection, SessionError};
use crate::storybook::StorybookError;

/// Error body: `{code, message, detail}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ApiError {
    #[serde(skip)]
    pub status: StatusCode,
    pub code: &'static str,
    pub message: String,
    pub detail: Value,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        Self { status, code, message: message.into(), detail: Value::Null }
    }

    pub fn with_detail(mut self, detail: Value) -> Self {
        self.detail = detail;
        self
    }

    pub fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "bad_request", message)
    }

    pub fn not_found(what: impl Into<String>) -> Self {
        Self::new(StatusCode::NOT_FOUND, "not_found", what)
    }

    pub fn forbidden(message: impl Into<String>) -> Self {
        Self::new(StatusCode::FORBIDDEN, "forbidden", message)
    }

    pub fn unauthorized() -> Self {
        Self::new(StatusCode::UNAUTHORIZED, "unauthorized", "missing or unknown bearer token")
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = crate::canon::to_pretty(&self).unwrap_or_else(|_| "{}".into());
        (self.status, [("content-type", "application/json")], body).into_response()
    }
}

impl From<AgentError> for ApiError {
    fn from(e: AgentError) -> Self {
        let agent = e.agent().map(|a| a.as_str());
        let (status, code) = match &e {
            AgentError::Precondition { .. } => (StatusCode::BAD_REQUEST, "precondition"),
            AgentError::Template(_) => (StatusCode::INTERNAL_SERVER_ERROR, "template"),
            _ => (StatusCode::BAD_GATEWAY, "provider_failure"),
        };
        ApiError::new(status, code, e.to_string()).with_detail(json!({ "agent": agent }))
    }
}

impl From<SessionError> for ApiError {
    fn from(e: SessionError) -> Self {
        let message = e.to_string();
        match e {
            SessionError::Rejected(r) => {
                let (status, code) = match &r {
                    Rejection::WrongState { .. } => (StatusCode::CONFLICT, "wrong_state"),
                    Rejection::WrongMilestone { .. } => (StatusCode::CONFLICT, "wrong_milestone"),
                    Rejection::TooLate { .. } => (StatusCode::CONFLICT, "too_late"),
                    Rejection::UnknownBranch { .. } => (StatusCode::BAD_REQUEST, "unknown_branch"),
                    Rejection::Invalid(_) => (StatusCode::BAD_REQUEST, "invalid"),
                };
                ApiError::new(status, code, message)
            }
            SessionError::UnknownTask(_) => ApiError::new(StatusCode::NOT_FOUND, "unknown_task", message),
            SessionError::TaskClaimed(_) => ApiError::new(StatusCode::CONFLICT, "task_claimed", message),
            SessionError::Agent(a) => a.into(),
            SessionError::Provider(_) => {
                ApiError::new(StatusCode::BAD_GATEWAY, "provider_failure", message)
            }
            SessionError::GenerationFailed { consecutive, aborted, source } => {
                ApiError::new(StatusCode::BAD_GATEWAY, "generation_failed", message).with_detail(json!({
                    "agent": source.agent().map(|a| a.as_str()),
                    "consecutive": consecutive,
                    "aborted": aborted,
                }))
            }
            SessionError::Corrupt(_) | SessionError::Log(_) => ApiError::internal(message),
        }
    }
}

impl From<StorybookError> for ApiError {
    fn from(e: StorybookError) -> Self {
        let message = e.to_string();
        match e {
            StorybookError::Incomplete { .. } | StorybookError::MissingAnalysis => {
                ApiError::new(StatusCode::CONFLICT, "wrong_state", message)
            }
            StorybookError::UnknownFormat(_) | StorybookError::UnknownVariant(_) => {
                ApiError::bad_request(message)
            }
            StorybookError::Io(_) | StorybookError::Encode(_) => ApiError::internal(message),
        }
    }
}
