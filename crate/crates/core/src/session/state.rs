//! Transition table. `Session::apply` is the only way state changes, for
//! live sessions and for replay alike.

use super::events::{EventKind, SessionEvent};
use super::MAX_REASKS;
use crate::domain::{
    BranchId, BranchOverride, Milestone, Session, SessionState, TeacherComment, CHAPTER_COUNT,
    PARAGRAPHS_PER_CHAPTER,
};

/// Why an event cannot be appended.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Rejection {
    #[error("{event} is not allowed in state {state}: {detail}")]
    WrongState { event: String, state: SessionState, detail: String },
    #[error("milestone {found} does not match the current milestone {expected}")]
    WrongMilestone { expected: u8, found: u8 },
    #[error("chapter {k} is already generated")]
    TooLate { k: u8 },
    #[error("chapter {k} has no branch {branch_id}")]
    UnknownBranch { k: u8, branch_id: BranchId },
    #[error("invalid event: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("corrupt session log at seq {seq}: {reason}")]
pub struct CorruptLog {
    pub seq: u64,
    pub reason: String,
}

impl Session {
    /// A fresh session from its `created` event.
    pub fn from_created(ev: SessionEvent) -> Result<Session, Rejection> {
        if ev.seq != 1 {
            return Err(Rejection::Invalid(format!("first event has seq {}", ev.seq)));
        }
        let EventKind::Created { session_id, task_id, child_label, outline, seed, claimed_by } =
            ev.event.clone()
        else {
            return Err(Rejection::Invalid(format!("first event is {}", ev.event)));
        };
        Ok(Session {
            session_id,
            task_id,
            child_label,
            outline,
            rng_seed: seed,
            claimed_by,
            state: SessionState::CharacterCustomization,
            pending_drawing: None,
            character: None,
            character_accepted: false,
            milestones: Vec::new(),
            chapters: Vec::new(),
            reflection: None,
            analysis: None,
            teacher_comments: Vec::new(),
            consecutive_failures: 0,
            abort_reason: None,
            event_log: vec![ev],
        })
    }

    /// Checks `ev` against the transition table and appends it. On error the
    /// session is unchanged.
    pub fn apply(&mut self, ev: SessionEvent) -> Result<(), Rejection> {
        let expected = self.last_seq() + 1;
        if ev.seq != expected {
            return Err(Rejection::Invalid(format!("expected seq {expected}, found {}", ev.seq)));
        }
        self.check(&ev.event)?;
        self.mutate(&ev);
        self.event_log.push(ev);
        Ok(())
    }

    fn wrong(&self, kind: &EventKind, detail: impl Into<String>) -> Rejection {
        Rejection::WrongState { event: kind.to_string(), state: self.state, detail: detail.into() }
    }

    fn current_milestone(&self, kind: &EventKind, k: u8) -> Result<(), Rejection> {
        match self.state {
            SessionState::AwaitingResponse(j) | SessionState::GeneratingChapter(j) if j != k => {
                Err(Rejection::WrongMilestone { expected: j, found: k })
            }
            SessionState::AwaitingResponse(_) | SessionState::GeneratingChapter(_) => Ok(()),
            _ => Err(self.wrong(kind, format!("no milestone {k} in progress"))),
        }
    }

    pub(crate) fn check(&self, kind: &EventKind) -> Result<(), Rejection> {
        use SessionState as S;
        match self.state {
            S::Aborted => return Err(self.wrong(kind, "session is aborted")),
            S::Complete if !matches!(kind, EventKind::TeacherCommentAdded { .. }) => {
                return Err(self.wrong(kind, "session is complete"))
            }
            _ => {}
        }
        let in_customization = self.state == S::CharacterCustomization;
        match kind {
            EventKind::Created { .. } => Err(self.wrong(kind, "session already exists")),
            EventKind::DrawingSubmitted { name, .. } => {
                if !in_customization {
                    return Err(self.wrong(kind, "character customization is over"));
                }
                if name.trim().is_empty() {
                    return Err(Rejection::Invalid("character name is empty".into()));
                }
                Ok(())
            }
            EventKind::CharacterGenerated { profile, .. } => {
                if !in_customization {
                    return Err(self.wrong(kind, "character customization is over"));
                }
                let next = self.character.as_ref().map_or(1, |c| c.generation_attempt + 1);
                if profile.generation_attempt != next {
                    return Err(Rejection::Invalid(format!(
                        "generation_attempt {} should be {next}",
                        profile.generation_attempt
                    )));
                }
                Ok(())
            }
            EventKind::CharacterAccepted => {
                if !in_customization {
                    Err(self.wrong(kind, "character customization is over"))
                } else if self.character.is_none() {
                    Err(self.wrong(kind, "no character generated"))
                } else if self.character_accepted {
                    Err(self.wrong(kind, "character already accepted"))
                } else {
                    Ok(())
                }
            }
            EventKind::QuestionAsked { k, text, .. } => {
                if text.trim().is_empty() {
                    return Err(Rejection::Invalid("question text is empty".into()));
                }
                let ready = match *k {
                    1 => in_customization && self.character_accepted,
                    2..=4 => {
                        self.state == S::GeneratingChapter(k - 1)
                            && self.chapters.len() == usize::from(k - 1)
                    }
                    _ => false,
                };
                if ready {
                    Ok(())
                } else {
                    Err(self.wrong(kind, format!("question {k} is not due")))
                }
            }
            EventKind::QuestionReasked { k, reask } => {
                if !matches!(self.state, S::AwaitingResponse(_)) {
                    return Err(self.wrong(kind, "no question is waiting"));
                }
                self.current_milestone(kind, *k)?;
                let done = self.milestone(*k).map_or(0, |m| m.reasks);
                if *reask != done + 1 || *reask > MAX_REASKS {
                    return Err(Rejection::Invalid(format!("re-ask {reask} after {done}")));
                }
                Ok(())
            }
            EventKind::ResponseRecorded { k, text, placeholder, .. } => {
                if !matches!(self.state, S::AwaitingResponse(_)) {
                    return Err(self.wrong(kind, "no question is waiting"));
                }
                self.current_milestone(kind, *k)?;
                if text.trim().is_empty() {
                    return Err(Rejection::Invalid("response text is empty".into()));
                }
                let reasks = self.milestone(*k).map_or(0, |m| m.reasks);
                if *placeholder && reasks < MAX_REASKS {
                    return Err(Rejection::Invalid("placeholder before re-asks are used up".into()));
                }
                Ok(())
            }
            EventKind::BranchSelected { k, branch_id, .. } => {
                if !matches!(self.state, S::GeneratingChapter(_)) {
                    return Err(self.wrong(kind, "no chapter is pending"));
                }
                self.current_milestone(kind, *k)?;
                if self.chapters.len() >= usize::from(*k) {
                    return Err(Rejection::TooLate { k: *k });
                }
                let spec = self.outline.chapter(*k).filter(|c| c.has_branches());
                let Some(spec) = spec else {
                    return Err(self.wrong(kind, format!("chapter {k} has no branches")));
                };
                if self.milestone(*k).is_some_and(|m| m.selected_branch.is_some()) {
                    return Err(self.wrong(kind, format!("branch for chapter {k} already selected")));
                }
                if spec.branch(branch_id).is_none() {
                    return Err(Rejection::UnknownBranch { k: *k, branch_id: branch_id.clone() });
                }
                Ok(())
            }
            EventKind::BranchOverridden { k, branch_id, by } => {
                if self.chapters.len() >= usize::from(*k) {
                    return Err(Rejection::TooLate { k: *k });
                }
                if self.state != S::GeneratingChapter(*k) {
                    return Err(self.wrong(kind, format!("chapter {k} is not pending")));
                }
                if self.milestone(*k).and_then(|m| m.selected_branch.as_ref()).is_none() {
                    return Err(self.wrong(kind, format!("no branch selected for chapter {k}")));
                }
                let known = self.outline.chapter(*k).and_then(|c| c.branch(branch_id)).is_some();
                if !known {
                    return Err(Rejection::UnknownBranch { k: *k, branch_id: branch_id.clone() });
                }
                if by.trim().is_empty() {
                    return Err(Rejection::Invalid("override needs a principal".into()));
                }
                Ok(())
            }
            EventKind::ChapterGenerated { chapter } => {
                let k = chapter.index;
                if !matches!(self.state, S::GeneratingChapter(_)) {
                    return Err(self.wrong(kind, "no chapter is pending"));
                }
                self.current_milestone(kind, k)?;
                if self.chapters.len() != usize::from(k) - 1 {
                    return Err(self.wrong(kind, format!("chapter {k} already generated")));
                }
                if chapter.paragraphs.len() != PARAGRAPHS_PER_CHAPTER
                    || chapter.paragraphs.iter().any(|p| p.trim().is_empty())
                {
                    return Err(Rejection::Invalid("chapter needs 4 non-empty paragraphs".into()));
                }
                let spec_has_branches = self.outline.chapter(k).is_some_and(|c| c.has_branches());
                let effective = self.milestone(k).and_then(Milestone::effective_branch);
                if spec_has_branches && effective.is_none() {
                    return Err(self.wrong(kind, format!("branch for chapter {k} not selected")));
                }
                if chapter.branch.as_ref() != effective {
                    return Err(Rejection::Invalid(format!(
                        "chapter {k} follows branch {:?}, expected {:?}",
                        chapter.branch, effective
                    )));
                }
                Ok(())
            }
            EventKind::GenerationFailed { consecutive, .. } => {
                if !matches!(self.state, S::GeneratingChapter(_) | S::Reflecting) {
                    return Err(self.wrong(kind, "nothing is being generated"));
                }
                if *consecutive != self.consecutive_failures + 1 {
                    return Err(Rejection::Invalid(format!(
                        "failure count {consecutive} after {}",
                        self.consecutive_failures
                    )));
                }
                Ok(())
            }
            EventKind::ReflectionGenerated { text, .. } => {
                if self.state != S::Reflecting || self.reflection.is_some() {
                    return Err(self.wrong(kind, "reflection is not due"));
                }
                if text.trim().is_empty() {
                    return Err(Rejection::Invalid("reflection is empty".into()));
                }
                Ok(())
            }
            EventKind::AnalysisGenerated { report, .. } => {
                if self.state != S::Reflecting || self.analysis.is_some() {
                    return Err(self.wrong(kind, "analysis is not due"));
                }
                if report.per_response_comments.len() != CHAPTER_COUNT {
                    return Err(Rejection::Invalid("analysis needs 4 comments".into()));
                }
                Ok(())
            }
            EventKind::TeacherCommentAdded { k, text, .. } => {
                if !self.milestone(*k).is_some_and(Milestone::has_response) {
                    return Err(self.wrong(kind, format!("milestone {k} has no response yet")));
                }
                if text.trim().is_empty() {
                    return Err(Rejection::Invalid("comment is empty".into()));
                }
                Ok(())
            }
            EventKind::Completed => {
                if self.state == S::Reflecting && self.reflection.is_some() && self.analysis.is_some()
                {
                    Ok(())
                } else {
                    Err(self.wrong(kind, "reflection and analysis are required"))
                }
            }
            EventKind::Aborted { .. } => Ok(()),
        }
    }

    fn milestone_mut(&mut self, k: u8) -> &mut Milestone {
        self.milestones.iter_mut().find(|m| m.index == k).expect("checked milestone")
    }

    fn mutate(&mut self, ev: &SessionEvent) {
        match &ev.event {
            EventKind::Created { .. } => {}
            EventKind::DrawingSubmitted { drawing, name } => {
                self.pending_drawing = Some((drawing.clone(), name.clone()));
            }
            EventKind::CharacterGenerated { profile, .. } => {
                self.character = Some(profile.clone());
                self.character_accepted = false;
                self.pending_drawing = None;
            }
            EventKind::CharacterAccepted => self.character_accepted = true,
            EventKind::QuestionAsked { k, text, audio, .. } => {
                self.milestones.push(Milestone {
                    index: *k,
                    question_text: text.clone(),
                    question_audio: audio.clone(),
                    asked_at: ev.at,
                    reasks: 0,
                    response_text: None,
                    response_audio: None,
                    response_source: None,
                    answered_at: None,
                    placeholder: false,
                    selected_branch: None,
                    branch_override: None,
                });
                self.consecutive_failures = 0;
                self.state = SessionState::AwaitingResponse(*k);
            }
            EventKind::QuestionReasked { k, reask } => self.milestone_mut(*k).reasks = *reask,
            EventKind::ResponseRecorded { k, text, audio, source, placeholder, .. } => {
                let m = self.milestone_mut(*k);
                m.response_text = Some(text.clone());
                m.response_audio = audio.clone();
                m.response_source = Some(*source);
                m.answered_at = Some(ev.at);
                m.placeholder = *placeholder;
                self.consecutive_failures = 0;
                self.state = SessionState::GeneratingChapter(*k);
            }
            EventKind::BranchSelected { k, branch_id, .. } => {
                self.milestone_mut(*k).selected_branch = Some(branch_id.clone());
            }
            EventKind::BranchOverridden { k, branch_id, by } => {
                self.milestone_mut(*k).branch_override =
                    Some(BranchOverride { branch_id: branch_id.clone(), by: by.clone() });
            }
            EventKind::ChapterGenerated { chapter } => {
                self.chapters.push(chapter.clone());
                self.consecutive_failures = 0;
                if usize::from(chapter.index) == CHAPTER_COUNT {
                    self.state = SessionState::Reflecting;
                }
            }
            EventKind::GenerationFailed { consecutive, .. } => {
                self.consecutive_failures = *consecutive;
            }
            EventKind::ReflectionGenerated { text, .. } => {
                self.reflection = Some(text.clone());
                self.consecutive_failures = 0;
            }
            EventKind::AnalysisGenerated { report, .. } => {
                self.analysis = Some(report.clone());
                self.consecutive_failures = 0;
            }
            EventKind::TeacherCommentAdded { k, text, .. } => {
                self.teacher_comments.push(TeacherComment { milestone: *k, text: text.clone() });
            }
            EventKind::Completed => self.state = SessionState::Complete,
            EventKind::Aborted { reason } => {
                self.state = SessionState::Aborted;
                self.abort_reason = Some(reason.clone());
            }
        }
    }
}

/// Rebuilds a session from its log without re-running any generation.
pub fn replay(events: &[SessionEvent]) -> Result<Session, CorruptLog> {
    let first = events.first().ok_or(CorruptLog { seq: 1, reason: "empty log".into() })?;
    let mut session = Session::from_created(first.clone())
        .map_err(|e| CorruptLog { seq: first.seq, reason: e.to_string() })?;
    for ev in &events[1..] {
        let seq = ev.seq;
        session.apply(ev.clone()).map_err(|e| CorruptLog { seq, reason: e.to_string() })?;
    }
    Ok(session)
}
