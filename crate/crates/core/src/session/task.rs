use std::collections::BTreeMap;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::SessionError;
use crate::canon::{self, CanonError};
use crate::domain::{validate_outline, StoryOutline, TaskId, Timestamp, ValidationResult};

pub const TASK_DOCUMENT: &str = "session_task";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskStatus {
    Pending,
    Claimed,
    Done,
}

/// A deployed outline waiting for one child's session.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionTask {
    pub task_id: TaskId,
    /// Frozen copy taken at deploy time.
    pub outline: StoryOutline,
    pub child_label: String,
    pub status: TaskStatus,
    pub created_at: Timestamp,
    pub claimed_by: Option<String>,
}

impl SessionTask {
    /// Validates `outline` and freezes a deployed snapshot of it.
    pub fn deploy(
        task_id: TaskId,
        outline: &StoryOutline,
        child_label: &str,
        at: Timestamp,
    ) -> Result<SessionTask, ValidationResult> {
        let result = validate_outline(outline);
        if !result.is_ok() {
            return Err(result);
        }
        Ok(SessionTask {
            task_id,
            outline: outline.deployed(),
            child_label: child_label.trim().to_string(),
            status: TaskStatus::Pending,
            created_at: at,
            claimed_by: None,
        })
    }

    pub fn to_document(&self) -> Result<String, CanonError> {
        canon::to_document(TASK_DOCUMENT, self)
    }

    pub fn from_document(text: &str) -> Result<Self, CanonError> {
        canon::from_document(TASK_DOCUMENT, text)
    }
}

/// Task registry; claiming is atomic so a task starts at most one session.
#[derive(Debug, Default)]
pub struct TaskBoard {
    tasks: Mutex<BTreeMap<TaskId, SessionTask>>,
}

impl TaskBoard {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&self, task: SessionTask) {
        self.tasks.lock().expect("task board").insert(task.task_id.clone(), task);
    }

    pub fn get(&self, id: &TaskId) -> Option<SessionTask> {
        self.tasks.lock().expect("task board").get(id).cloned()
    }

    pub fn pending(&self) -> Vec<SessionTask> {
        let tasks = self.tasks.lock().expect("task board");
        tasks.values().filter(|t| t.status == TaskStatus::Pending).cloned().collect()
    }

    pub fn all(&self) -> Vec<SessionTask> {
        self.tasks.lock().expect("task board").values().cloned().collect()
    }

    /// Marks a pending task claimed and returns it.
    pub fn claim(&self, id: &TaskId, principal: &str) -> Result<SessionTask, SessionError> {
        let mut tasks = self.tasks.lock().expect("task board");
        let task = tasks.get_mut(id).ok_or_else(|| SessionError::UnknownTask(id.clone()))?;
        if task.status != TaskStatus::Pending {
            return Err(SessionError::TaskClaimed(id.clone()));
        }
        task.status = TaskStatus::Claimed;
        task.claimed_by = Some(principal.to_string());
        Ok(task.clone())
    }

    pub fn finish(&self, id: &TaskId) {
        if let Some(task) = self.tasks.lock().expect("task board").get_mut(id) {
            task.status = TaskStatus::Done;
        }
    }
}
