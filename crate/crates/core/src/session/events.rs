use std::fmt;

use serde::{Deserialize, Serialize};

use crate::assets::AssetRef;
use crate::domain::{
    AgentTrace, AnalysisReport, BranchId, CharacterProfile, GeneratedChapter, ResponseSource,
    SessionId, StoryOutline, TaskId, Timestamp, Valence,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionEvent {
    pub seq: u64,
    pub at: Timestamp,
    pub event: EventKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload", rename_all = "snake_case")]
pub enum EventKind {
    Created {
        session_id: SessionId,
        task_id: TaskId,
        child_label: String,
        outline: StoryOutline,
        seed: u64,
        claimed_by: Option<String>,
    },
    DrawingSubmitted {
        drawing: AssetRef,
        name: String,
    },
    CharacterGenerated {
        profile: CharacterProfile,
        traces: Vec<AgentTrace>,
    },
    CharacterAccepted,
    QuestionAsked {
        k: u8,
        text: String,
        audio: Option<AssetRef>,
        trace: AgentTrace,
    },
    QuestionReasked {
        k: u8,
        reask: u8,
    },
    ResponseRecorded {
        k: u8,
        text: String,
        audio: Option<AssetRef>,
        source: ResponseSource,
        placeholder: bool,
        idempotency_key: Option<String>,
    },
    BranchSelected {
        k: u8,
        branch_id: BranchId,
        valence: Option<Valence>,
        trace: Option<AgentTrace>,
    },
    BranchOverridden {
        k: u8,
        branch_id: BranchId,
        by: String,
    },
    ChapterGenerated {
        chapter: GeneratedChapter,
    },
    GenerationFailed {
        k: Option<u8>,
        agent: String,
        reason: String,
        consecutive: u32,
    },
    ReflectionGenerated {
        text: String,
        trace: AgentTrace,
    },
    AnalysisGenerated {
        report: AnalysisReport,
        trace: AgentTrace,
    },
    TeacherCommentAdded {
        k: u8,
        text: String,
        by: String,
    },
    Completed,
    Aborted {
        reason: String,
    },
}

impl EventKind {
    pub fn name(&self) -> &'static str {
        match self {
            EventKind::Created { .. } => "created",
            EventKind::DrawingSubmitted { .. } => "drawing_submitted",
            EventKind::CharacterGenerated { .. } => "character_generated",
            EventKind::CharacterAccepted => "character_accepted",
            EventKind::QuestionAsked { .. } => "question_asked",
            EventKind::QuestionReasked { .. } => "question_reasked",
            EventKind::ResponseRecorded { .. } => "response_recorded",
            EventKind::BranchSelected { .. } => "branch_selected",
            EventKind::BranchOverridden { .. } => "branch_overridden",
            EventKind::ChapterGenerated { .. } => "chapter_generated",
            EventKind::GenerationFailed { .. } => "generation_failed",
            EventKind::ReflectionGenerated { .. } => "reflection_generated",
            EventKind::AnalysisGenerated { .. } => "analysis_generated",
            EventKind::TeacherCommentAdded { .. } => "teacher_comment_added",
            EventKind::Completed => "completed",
            EventKind::Aborted { .. } => "aborted",
        }
    }

    /// Milestone index the event refers to, if any.
    pub fn milestone(&self) -> Option<u8> {
        match self {
            EventKind::QuestionAsked { k, .. }
            | EventKind::QuestionReasked { k, .. }
            | EventKind::ResponseRecorded { k, .. }
            | EventKind::BranchSelected { k, .. }
            | EventKind::BranchOverridden { k, .. }
            | EventKind::TeacherCommentAdded { k, .. } => Some(*k),
            EventKind::ChapterGenerated { chapter } => Some(chapter.index),
            EventKind::GenerationFailed { k, .. } => *k,
            _ => None,
        }
    }
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.milestone() {
            Some(k) => write!(f, "{}({k})", self.name()),
            None => f.write_str(self.name()),
        }
    }
}
