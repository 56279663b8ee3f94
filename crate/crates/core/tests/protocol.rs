use std::cell::Cell;
use std::sync::atomic::{AtomicU32, Ordering};
use std::sync::Arc;

use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};

use taleweave::domain::SessionState;
use taleweave::provider::{AgentRole, ProviderError, TextProvider, TextRequest, TextResult};
use taleweave::session::{
    decode_log, encode_log, replay, EventKind, ResponseInput, ResponseOutcome, SessionError,
    ABORT_AFTER,
};

mod support;
use support::model::{check_complete, check_replay, ops, run_sequence};
use support::{case, Rig};

#[test]
fn random_sequences_match_the_model() {
    let rig = Rig::new(11);
    let outlines = [case(1).outline, case(6).outline, case(2).outline];
    let mut runner = TestRunner::new(Config { cases: 1_000, failure_persistence: None, ..Config::default() });
    let completed = Cell::new(0u32);
    runner
        .run(&(ops(64), 0usize..3, any::<u64>()), |(ops, which, seed)| {
            let done = run_sequence(&rig, &outlines[which], seed, &ops).map_err(TestCaseError::fail)?;
            completed.set(completed.get() + u32::from(done));
            Ok(())
        })
        .unwrap();
    assert!(completed.get() > 20, "only {} sequences completed", completed.get());
}

fn complete(rig: &Rig, n: usize, seed: u64) -> taleweave::domain::Session {
    let c = case(n);
    let e = &rig.engine;
    let mut s = rig.session(&c.outline, seed);
    e.submit_drawing(&mut s, rig.drawing(), &c.script.name).unwrap();
    e.accept_character(&mut s).unwrap();
    for (i, text) in c.script.responses.iter().enumerate() {
        let k = i as u8 + 1;
        assert_eq!(e.submit_response(&mut s, k, ResponseInput::Typed(text.clone()), None).unwrap(), ResponseOutcome::Recorded);
        e.advance_generation(&mut s).unwrap();
    }
    s
}

#[test]
fn a_straight_run_has_the_expected_event_sequence() {
    let rig = Rig::new(1);
    let s = complete(&rig, 1, 1);
    let names: Vec<&str> = s.event_log.iter().map(|e| e.event.name()).collect();
    assert_eq!(
        names,
        [
            "created", "drawing_submitted", "character_generated", "character_accepted",
            "question_asked", "response_recorded", "chapter_generated",
            "question_asked", "response_recorded", "chapter_generated",
            "question_asked", "response_recorded", "branch_selected", "chapter_generated",
            "question_asked", "response_recorded", "chapter_generated",
            "reflection_generated", "analysis_generated", "completed",
        ]
    );
    check_complete(&s).unwrap();
    let seqs: Vec<u64> = s.event_log.iter().map(|e| e.seq).collect();
    assert_eq!(seqs, (1..=20).collect::<Vec<_>>());
}

#[test]
fn replay_through_the_log_codec_matches_live_state() {
    let rig = Rig::new(2);
    let s = complete(&rig, 6, 2);
    let text = encode_log(&s.event_log).unwrap();
    let events = decode_log(&text).unwrap();
    assert_eq!(replay(&events).unwrap(), s);
    assert_eq!(encode_log(&events).unwrap(), text);
}

#[test]
fn every_log_prefix_replays() {
    let rig = Rig::new(3);
    let s = complete(&rig, 1, 3);
    for len in 1..=s.event_log.len() {
        let partial = replay(&s.event_log[..len]).unwrap();
        assert_eq!(partial.event_log.len(), len);
        assert_eq!(partial.state.is_terminal(), len == s.event_log.len());
    }
}

#[test]
fn reordered_or_gapped_logs_are_rejected() {
    let rig = Rig::new(4);
    let s = complete(&rig, 2, 4);
    let mut gapped = s.event_log.clone();
    gapped.remove(5);
    assert!(replay(&gapped).is_err());
    let mut swapped = s.event_log.clone();
    swapped.swap(5, 6);
    assert!(replay(&swapped).is_err());
    assert!(replay(&[]).is_err());
}

#[test]
fn two_blank_answers_are_reasked_and_the_third_becomes_a_placeholder() {
    let rig = Rig::new(5);
    let e = &rig.engine;
    let mut s = rig.session(&case(3).outline, 5);
    e.submit_drawing(&mut s, rig.drawing(), "Kit").unwrap();
    e.accept_character(&mut s).unwrap();
    let blank = || ResponseInput::Typed("   ".into());
    assert_eq!(e.submit_response(&mut s, 1, blank(), None).unwrap(), ResponseOutcome::Reasked(1));
    assert_eq!(e.submit_response(&mut s, 1, blank(), None).unwrap(), ResponseOutcome::Reasked(2));
    assert_eq!(e.submit_response(&mut s, 1, blank(), None).unwrap(), ResponseOutcome::Recorded);
    let m = s.milestone(1).unwrap();
    assert!(m.placeholder);
    assert_eq!(m.response_text.as_deref(), Some(taleweave::agents::PLACEHOLDER_RESPONSE));
    e.advance_generation(&mut s).unwrap();
    assert_eq!(s.state, SessionState::AwaitingResponse(2));
}

#[test]
fn a_response_for_the_wrong_milestone_is_refused() {
    let rig = Rig::new(6);
    let e = &rig.engine;
    let mut s = rig.session(&case(4).outline, 6);
    e.submit_drawing(&mut s, rig.drawing(), "Kit").unwrap();
    e.accept_character(&mut s).unwrap();
    let before = s.event_log.len();
    let err = e.submit_response(&mut s, 2, ResponseInput::Typed("hi".into()), None).unwrap_err();
    assert!(err.is_wrong_state(), "{err}");
    assert_eq!(s.event_log.len(), before);
}

#[test]
fn comments_are_accepted_after_completion() {
    let rig = Rig::new(7);
    let mut s = complete(&rig, 5, 7);
    rig.engine.add_comment(&mut s, 2, "Ask about the bus.", "teacher").unwrap();
    assert_eq!(s.teacher_comment(2), Some("Ask about the bus."));
    assert!(rig.engine.abort(&mut s, "late").unwrap_err().is_wrong_state());
    check_replay(&s).unwrap();
}

/// Passes text requests through, except that writing fails `fail` times.
struct FlakyWriter {
    inner: Arc<dyn TextProvider>,
    fail: u32,
    seen: AtomicU32,
}

impl TextProvider for FlakyWriter {
    fn generate_text(&self, req: &TextRequest) -> Result<TextResult, ProviderError> {
        if req.role == AgentRole::Writing && self.seen.fetch_add(1, Ordering::SeqCst) < self.fail {
            return Err(ProviderError::Injected("writer offline".into()));
        }
        self.inner.generate_text(req)
    }
}

fn flaky_rig(fail: u32) -> Rig {
    Rig::with_gateway(8, |g| {
        let inner = g.text.clone();
        g.with_text(Arc::new(FlakyWriter { inner, fail, seen: AtomicU32::new(0) }))
    })
}

fn to_first_chapter(rig: &Rig) -> taleweave::domain::Session {
    let e = &rig.engine;
    let mut s = rig.session(&case(7).outline, 8);
    e.submit_drawing(&mut s, rig.drawing(), "Pip").unwrap();
    e.accept_character(&mut s).unwrap();
    e.submit_response(&mut s, 1, ResponseInput::Typed("I ask my friend.".into()), None).unwrap();
    s
}

#[test]
fn three_consecutive_generation_failures_abort() {
    let rig = flaky_rig(u32::MAX);
    let mut s = to_first_chapter(&rig);
    for attempt in 1..=ABORT_AFTER {
        match rig.engine.advance_generation(&mut s) {
            Err(SessionError::GenerationFailed { consecutive, aborted, .. }) => {
                assert_eq!(consecutive, attempt);
                assert_eq!(aborted, attempt == ABORT_AFTER);
            }
            other => panic!("attempt {attempt}: {other:?}"),
        }
    }
    assert_eq!(s.state, SessionState::Aborted);
    assert!(s.abort_reason.as_deref().unwrap().contains("writer offline"));
    let failures = s.event_log.iter().filter(|e| matches!(e.event, EventKind::GenerationFailed { .. })).count();
    assert_eq!(failures, 3);
    assert!(rig.engine.advance_generation(&mut s).unwrap_err().is_wrong_state());
    check_replay(&s).unwrap();
}

#[test]
fn generation_resumes_after_fewer_failures() {
    let rig = flaky_rig(2);
    let mut s = to_first_chapter(&rig);
    assert!(rig.engine.advance_generation(&mut s).is_err());
    assert!(rig.engine.advance_generation(&mut s).is_err());
    rig.engine.advance_generation(&mut s).unwrap();
    assert_eq!(s.state, SessionState::AwaitingResponse(2));
    assert_eq!(s.consecutive_failures, 0);
    assert_eq!(s.chapters.len(), 1);
    check_replay(&s).unwrap();
}

#[test]
fn duplicate_keys_never_append() {
    let rig = Rig::new(9);
    let e = &rig.engine;
    let mut s = rig.session(&case(8).outline, 9);
    e.submit_drawing(&mut s, rig.drawing(), "Pip").unwrap();
    e.accept_character(&mut s).unwrap();
    let say = |t: &str| ResponseInput::Typed(t.into());
    assert_eq!(e.submit_response(&mut s, 1, say("first"), Some("k1")).unwrap(), ResponseOutcome::Recorded);
    let len = s.event_log.len();
    assert_eq!(e.submit_response(&mut s, 1, say("again"), Some("k1")).unwrap(), ResponseOutcome::Duplicate);
    e.advance_generation(&mut s).unwrap();
    let len2 = s.event_log.len();
    assert!(len2 > len);
    assert_eq!(e.submit_response(&mut s, 2, say("late copy"), Some("k1")).unwrap(), ResponseOutcome::Duplicate);
    assert_eq!(s.event_log.len(), len2);
    assert_eq!(s.milestone(1).unwrap().response_text.as_deref(), Some("first"));
}
