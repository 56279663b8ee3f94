use std::fmt;

use serde::{Deserialize, Serialize};

use super::{BranchId, SessionId, StoryOutline, TaskId, Timestamp};
use crate::assets::AssetRef;
use crate::session::SessionEvent;

pub const PARAGRAPHS_PER_CHAPTER: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "state", content = "k", rename_all = "snake_case")]
pub enum SessionState {
    Created,
    CharacterCustomization,
    AwaitingResponse(u8),
    GeneratingChapter(u8),
    Reflecting,
    Complete,
    Aborted,
}

impl SessionState {
    pub fn is_terminal(self) -> bool {
        matches!(self, SessionState::Complete | SessionState::Aborted)
    }
}

impl fmt::Display for SessionState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SessionState::Created => f.write_str("created"),
            SessionState::CharacterCustomization => f.write_str("character_customization"),
            SessionState::AwaitingResponse(k) => write!(f, "awaiting_response({k})"),
            SessionState::GeneratingChapter(k) => write!(f, "generating_chapter({k})"),
            SessionState::Reflecting => f.write_str("reflecting"),
            SessionState::Complete => f.write_str("complete"),
            SessionState::Aborted => f.write_str("aborted"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CharacterProfile {
    pub name: String,
    pub description: String,
    pub source_drawing: AssetRef,
    pub illustration: AssetRef,
    pub generation_attempt: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResponseSource {
    Typed,
    Transcribed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BranchOverride {
    pub branch_id: BranchId,
    pub by: String,
}

/// One question/response cycle.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Milestone {
    pub index: u8,
    pub question_text: String,
    pub question_audio: Option<AssetRef>,
    pub asked_at: Timestamp,
    pub reasks: u8,
    pub response_text: Option<String>,
    pub response_audio: Option<AssetRef>,
    pub response_source: Option<ResponseSource>,
    pub answered_at: Option<Timestamp>,
    /// Set when the child stayed silent through every re-ask.
    pub placeholder: bool,
    pub selected_branch: Option<BranchId>,
    pub branch_override: Option<BranchOverride>,
}

impl Milestone {
    pub fn has_response(&self) -> bool {
        self.response_text.is_some()
    }

    /// The branch writing should follow: a teacher override wins.
    pub fn effective_branch(&self) -> Option<&BranchId> {
        self.branch_override.as_ref().map(|o| &o.branch_id).or(self.selected_branch.as_ref())
    }
}

/// Audit record of one agent invocation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgentTrace {
    pub agent: String,
    pub rendered_prompt: String,
    /// Labels of every context segment sent with the request.
    pub context_labels: Vec<String>,
    #[serde(default)]
    pub reference_images: Vec<AssetRef>,
    pub raw_output: String,
    pub validated_output: String,
    pub attempts: u32,
    #[serde(default)]
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratedChapter {
    pub index: u8,
    pub paragraphs: Vec<String>,
    pub panel_image: AssetRef,
    pub branch: Option<BranchId>,
    pub provider_trace: Vec<AgentTrace>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub per_response_comments: Vec<String>,
    pub overall_analysis: String,
    pub parent_advice: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TeacherComment {
    pub milestone: u8,
    pub text: String,
}

/// Event-sourced record of one child's co-creation run.
///
/// Every field other than `event_log` is derived from the log; see
/// [`crate::session::replay`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Session {
    pub session_id: SessionId,
    pub task_id: TaskId,
    pub child_label: String,
    pub outline: StoryOutline,
    pub rng_seed: u64,
    pub claimed_by: Option<String>,
    pub state: SessionState,
    pub pending_drawing: Option<(AssetRef, String)>,
    pub character: Option<CharacterProfile>,
    pub character_accepted: bool,
    pub milestones: Vec<Milestone>,
    pub chapters: Vec<GeneratedChapter>,
    pub reflection: Option<String>,
    pub analysis: Option<AnalysisReport>,
    pub teacher_comments: Vec<TeacherComment>,
    pub consecutive_failures: u32,
    pub abort_reason: Option<String>,
    pub event_log: Vec<SessionEvent>,
}

impl Session {
    pub fn milestone(&self, k: u8) -> Option<&Milestone> {
        self.milestones.iter().find(|m| m.index == k)
    }

    pub fn last_seq(&self) -> u64 {
        self.event_log.last().map_or(0, |e| e.seq)
    }

    pub fn protagonist(&self) -> Option<&str> {
        self.character.as_ref().map(|c| c.name.as_str())
    }

    pub fn teacher_comment(&self, k: u8) -> Option<&str> {
        self.teacher_comments.iter().rev().find(|c| c.milestone == k).map(|c| c.text.as_str())
    }
}
