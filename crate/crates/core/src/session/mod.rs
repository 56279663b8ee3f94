//! Session protocol: event log, transition table, task board and the engine
//! that drives agents through a co-creation run.

mod engine;
mod events;
mod log;
mod state;
mod task;

pub use engine::{Engine, ResponseInput, ResponseOutcome};
pub use events::{EventKind, SessionEvent};
pub use log::{append_event, decode_log, encode_log, read_log, write_log, LogError, LOG_DOCUMENT};
pub use state::{replay, CorruptLog, Rejection};
pub use task::{SessionTask, TaskBoard, TaskStatus, TASK_DOCUMENT};

use crate::agents::AgentError;
use crate::domain::TaskId;
use crate::provider::ProviderError;

/// Blank answers re-asked before a placeholder is recorded.
pub const MAX_REASKS: u8 = 2;
/// Consecutive generation failures that abort a session.
pub const ABORT_AFTER: u32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum SessionError {
    #[error(transparent)]
    Rejected(#[from] Rejection),
    #[error("unknown task {0}")]
    UnknownTask(TaskId),
    #[error("task {0} is already claimed")]
    TaskClaimed(TaskId),
    #[error(transparent)]
    Agent(#[from] AgentError),
    #[error(transparent)]
    Provider(ProviderError),
    #[error("generation failed ({consecutive} in a row{}): {source}", if *aborted { ", session aborted" } else { "" })]
    GenerationFailed { consecutive: u32, aborted: bool, source: AgentError },
    #[error(transparent)]
    Corrupt(#[from] CorruptLog),
    #[error(transparent)]
    Log(#[from] LogError),
}

impl SessionError {
    /// True for events that are out of order for the current state.
    pub fn is_wrong_state(&self) -> bool {
        matches!(
            self,
            SessionError::Rejected(
                Rejection::WrongState { .. } | Rejection::WrongMilestone { .. } | Rejection::TooLate { .. }
            )
        )
    }
}
