//! Shared domain types used by every other module.

mod ids;
mod instruments;
mod outline;
mod session;
mod time;

pub mod coping;

pub use coping::{CopingDimension, CopingSubscale, CopingTag, ResponseCode, TagOrigin};
pub use ids::{new_id, BranchId, OutlineId, SessionId, TaskId};
pub use instruments::{
    Benchmark, NormalityIssue, ShapiroWilk, SusAnalysis, SusResponse, SUS_ITEM_COUNT,
};
pub use outline::{
    validate_outline, validate_revision, BranchSpec, ChapterSpec, OutlineStatus, StoryOutline,
    ValidationResult, Valence, Violation, CHAPTER_COUNT, OUTLINE_DOCUMENT,
};
pub use session::{
    AgentTrace, AnalysisReport, BranchOverride, CharacterProfile, GeneratedChapter, Milestone,
    ResponseSource, Session, SessionState, TeacherComment, PARAGRAPHS_PER_CHAPTER,
};
pub use time::{Clock, SteppingClock, SystemClock, Timestamp};
