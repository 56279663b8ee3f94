use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::events::{EventKind, SessionEvent};
use super::state::Rejection;
use super::task::{SessionTask, TaskBoard};
use super::{SessionError, ABORT_AFTER, MAX_REASKS};
use crate::agents::{AgentError, Agents, PLACEHOLDER_RESPONSE};
use crate::assets::AssetRef;
use crate::domain::{
    new_id, BranchId, CharacterProfile, Clock, GeneratedChapter, ResponseSource, Session,
    SessionId, SessionState, TaskId, CHAPTER_COUNT,
};
use crate::provider::AgentRole;

/// What the child handed in at a milestone.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ResponseInput {
    Typed(String),
    Audio(AssetRef),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResponseOutcome {
    Recorded,
    /// Blank input; the question was asked again (1 or 2).
    Reasked(u8),
    /// The idempotency key was seen before; nothing was appended.
    Duplicate,
}

/// Drives sessions through the protocol. Holds no session state itself.
pub struct Engine {
    agents: Agents,
    clock: Arc<dyn Clock>,
    voice_profile: String,
}

impl Engine {
    pub fn new(agents: Agents, clock: Arc<dyn Clock>, voice_profile: impl Into<String>) -> Self {
        Self { agents, clock, voice_profile: voice_profile.into() }
    }

    pub fn agents(&self) -> &Agents {
        &self.agents
    }

    pub fn clock(&self) -> &Arc<dyn Clock> {
        &self.clock
    }

    fn commit(&self, s: &mut Session, event: EventKind) -> Result<(), Rejection> {
        s.check(&event)?;
        let ev = SessionEvent { seq: s.last_seq() + 1, at: self.clock.now(), event };
        s.apply(ev)
    }

    /// Claims `task_id` on `board` and opens its session.
    pub fn start_session(
        &self,
        board: &TaskBoard,
        task_id: &TaskId,
        seed: u64,
        principal: &str,
    ) -> Result<Session, SessionError> {
        let task = board.claim(task_id, principal)?;
        Ok(self.open(&task, seed, Some(principal.to_string())))
    }

    /// Opens a session on an already-claimed task. The session id is
    /// derived from the clock and `seed`.
    pub fn open(&self, task: &SessionTask, seed: u64, claimed_by: Option<String>) -> Session {
        let at = self.clock.now();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let session_id = SessionId::new(new_id("ses", at, &mut rng));
        let ev = SessionEvent {
            seq: 1,
            at,
            event: EventKind::Created {
                session_id,
                task_id: task.task_id.clone(),
                child_label: task.child_label.clone(),
                outline: task.outline.clone(),
                seed,
                claimed_by,
            },
        };
        Session::from_created(ev).expect("created event is well-formed")
    }

    /// Generates a character from a drawing; repeatable until accepted.
    pub fn submit_drawing(
        &self,
        s: &mut Session,
        drawing: AssetRef,
        name: &str,
    ) -> Result<CharacterProfile, SessionError> {
        let name = name.trim().to_string();
        self.commit(s, EventKind::DrawingSubmitted { drawing: drawing.clone(), name: name.clone() })?;
        let (profile, traces) = self.agents.character(&drawing, &name, s.character.as_ref())?;
        self.commit(s, EventKind::CharacterGenerated { profile: profile.clone(), traces })?;
        Ok(profile)
    }

    /// Accepts the current character and asks question 1.
    pub fn accept_character(&self, s: &mut Session) -> Result<(), SessionError> {
        let resuming = s.state == SessionState::CharacterCustomization && s.character_accepted;
        if !resuming {
            self.commit(s, EventKind::CharacterAccepted)?;
        }
        self.ask_question(s, 1)?;
        Ok(())
    }

    fn ask_question(&self, s: &mut Session, k: u8) -> Result<(), AgentError> {
        let profile = s.character.as_ref().ok_or_else(|| AgentError::Precondition {
            agent: AgentRole::Question,
            reason: "no character".into(),
        })?;
        let (text, trace) = self.agents.question(&s.outline, profile, &s.chapters, k)?;
        let audio = self
            .agents
            .gateway()
            .synthesize_speech(&text, &self.voice_profile)
            .map_err(|source| AgentError::Provider { agent: AgentRole::Question, source })?;
        self.commit(s, EventKind::QuestionAsked { k, text, audio: Some(audio.audio), trace })
            .map_err(|e| AgentError::Precondition { agent: AgentRole::Question, reason: e.to_string() })
    }

    /// Records the child's answer to milestone `k`.
    ///
    /// Blank input (typed or transcribed) is re-asked up to twice; the third
    /// blank answer records a placeholder. A repeated idempotency key is a
    /// no-op.
    pub fn submit_response(
        &self,
        s: &mut Session,
        k: u8,
        input: ResponseInput,
        idempotency_key: Option<&str>,
    ) -> Result<ResponseOutcome, SessionError> {
        if let Some(key) = idempotency_key {
            let seen = s.event_log.iter().any(|e| {
                matches!(&e.event, EventKind::ResponseRecorded { idempotency_key: Some(x), .. } if x == key)
            });
            if seen {
                return Ok(ResponseOutcome::Duplicate);
            }
        }
        match s.state {
            SessionState::AwaitingResponse(j) if j == k => {}
            SessionState::AwaitingResponse(j) => {
                return Err(Rejection::WrongMilestone { expected: j, found: k }.into())
            }
            state => {
                return Err(Rejection::WrongState {
                    event: format!("response_recorded({k})"),
                    state,
                    detail: "no question is waiting".into(),
                }
                .into())
            }
        }
        let (text, audio, source) = match input {
            ResponseInput::Typed(text) => (text, None, ResponseSource::Typed),
            ResponseInput::Audio(audio) => {
                let text = self.agents.gateway().transcribe(&audio).map_err(SessionError::Provider)?;
                (text, Some(audio), ResponseSource::Transcribed)
            }
        };
        let text = text.trim().to_string();
        let mut placeholder = false;
        let text = if text.is_empty() {
            let reasks = s.milestone(k).map_or(0, |m| m.reasks);
            if reasks < MAX_REASKS {
                self.commit(s, EventKind::QuestionReasked { k, reask: reasks + 1 })?;
                return Ok(ResponseOutcome::Reasked(reasks + 1));
            }
            placeholder = true;
            PLACEHOLDER_RESPONSE.to_string()
        } else {
            text
        };
        self.commit(
            s,
            EventKind::ResponseRecorded {
                k,
                text,
                audio,
                source,
                placeholder,
                idempotency_key: idempotency_key.map(str::to_string),
            },
        )?;
        // Selection failures are recorded and retried by advance_generation.
        if let Err(e) = self.ensure_branch(s, k) {
            self.record_failure(s, Some(k), e);
        }
        Ok(ResponseOutcome::Recorded)
    }

    fn ensure_branch(&self, s: &mut Session, k: u8) -> Result<(), AgentError> {
        let Some(spec) = s.outline.chapter(k).filter(|c| c.has_branches()).cloned() else {
            return Ok(());
        };
        let Some(m) = s.milestone(k) else { return Ok(()) };
        if m.selected_branch.is_some() {
            return Ok(());
        }
        let response = m.response_text.clone().unwrap_or_default();
        let choice = self.agents.select_branch(&spec, &m.question_text, &response)?;
        self.commit(
            s,
            EventKind::BranchSelected {
                k,
                branch_id: choice.branch_id,
                valence: choice.valence,
                trace: choice.trace,
            },
        )
        .map_err(|e| AgentError::Precondition { agent: AgentRole::Writing, reason: e.to_string() })
    }

    /// Logs a failure; aborts after the third in a row.
    fn record_failure(&self, s: &mut Session, k: Option<u8>, error: AgentError) -> SessionError {
        let consecutive = s.consecutive_failures + 1;
        let agent = error.agent().map_or("pipeline".to_string(), |a| a.to_string());
        let reason = error.to_string();
        let logged = self.commit(
            s,
            EventKind::GenerationFailed { k, agent, reason: reason.clone(), consecutive },
        );
        let mut aborted = false;
        if logged.is_ok() && consecutive >= ABORT_AFTER {
            aborted = self
                .commit(
                    s,
                    EventKind::Aborted {
                        reason: format!("{consecutive} consecutive generation failures; last: {reason}"),
                    },
                )
                .is_ok();
        }
        SessionError::GenerationFailed { consecutive, aborted, source: error }
    }

    fn generate_chapter(&self, s: &mut Session, k: u8) -> Result<(), AgentError> {
        self.ensure_branch(s, k)?;
        let profile = s.character.clone().ok_or_else(|| AgentError::Precondition {
            agent: AgentRole::Writing,
            reason: "no character".into(),
        })?;
        let m = s.milestone(k).ok_or_else(|| AgentError::Precondition {
            agent: AgentRole::Writing,
            reason: format!("no milestone {k}"),
        })?;
        let response = m.response_text.clone().unwrap_or_default();
        let branch: Option<BranchId> = m.effective_branch().cloned();
        let (paragraphs, writing) =
            self.agents.write(&s.outline, &profile, &s.chapters, k, &response, branch.as_ref())?;
        let (panel_image, drawing) = self.agents.draw(&profile, k, &paragraphs)?;
        let chapter = GeneratedChapter {
            index: k,
            paragraphs,
            panel_image,
            branch,
            provider_trace: vec![writing, drawing],
        };
        self.commit(s, EventKind::ChapterGenerated { chapter })
            .map_err(|e| AgentError::Precondition { agent: AgentRole::Writing, reason: e.to_string() })
    }

    fn wrap_up(&self, s: &mut Session) -> Result<(), AgentError> {
        let internal =
            |agent, e: Rejection| AgentError::Precondition { agent, reason: e.to_string() };
        if s.reflection.is_none() {
            let (text, trace) = self.agents.reflect(s)?;
            self.commit(s, EventKind::ReflectionGenerated { text, trace })
                .map_err(|e| internal(AgentRole::Reflection, e))?;
        }
        if s.analysis.is_none() {
            let (report, trace) = self.agents.analyse(s)?;
            self.commit(s, EventKind::AnalysisGenerated { report, trace })
                .map_err(|e| internal(AgentRole::Analysis, e))?;
        }
        self.commit(s, EventKind::Completed).map_err(|e| internal(AgentRole::Analysis, e))
    }

    /// Runs the pending generation step: chapter `k` and question `k + 1`,
    /// or after chapter 4 the reflection and analysis. Resumes partial work
    /// after a failure.
    pub fn advance_generation(&self, s: &mut Session) -> Result<(), SessionError> {
        loop {
            match s.state {
                SessionState::GeneratingChapter(k) => {
                    if s.chapters.len() < usize::from(k) {
                        if let Err(e) = self.generate_chapter(s, k) {
                            return Err(self.record_failure(s, Some(k), e));
                        }
                    }
                    if usize::from(k) < CHAPTER_COUNT {
                        if let Err(e) = self.ask_question(s, k + 1) {
                            return Err(self.record_failure(s, Some(k + 1), e));
                        }
                        return Ok(());
                    }
                }
                SessionState::Reflecting => {
                    return match self.wrap_up(s) {
                        Ok(()) => Ok(()),
                        Err(e) => Err(self.record_failure(s, None, e)),
                    };
                }
                state => {
                    return Err(Rejection::WrongState {
                        event: "advance_generation".into(),
                        state,
                        detail: "nothing to generate".into(),
                    }
                    .into())
                }
            }
        }
    }

    /// Teacher override of the selected branch for chapter `k`.
    pub fn override_branch(
        &self,
        s: &mut Session,
        k: u8,
        branch_id: BranchId,
        by: &str,
    ) -> Result<(), SessionError> {
        self.commit(s, EventKind::BranchOverridden { k, branch_id, by: by.to_string() })?;
        Ok(())
    }

    pub fn add_comment(&self, s: &mut Session, k: u8, text: &str, by: &str) -> Result<(), SessionError> {
        self.commit(
            s,
            EventKind::TeacherCommentAdded { k, text: text.trim().to_string(), by: by.to_string() },
        )?;
        Ok(())
    }

    pub fn abort(&self, s: &mut Session, reason: &str) -> Result<(), SessionError> {
        self.commit(s, EventKind::Aborted { reason: reason.to_string() })?;
        Ok(())
    }
}
