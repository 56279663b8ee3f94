//! Reference model of the session protocol, written from the transition
//! rules without looking at the engine's bookkeeping.

use std::collections::HashSet;

use proptest::prelude::*;

use taleweave::domain::{BranchId, Session, SessionState, StoryOutline};
use taleweave::session::{replay, Engine, ResponseInput, ResponseOutcome, SessionError};

#[derive(Debug, Clone)]
pub enum Text {
    Blank,
    Words(&'static str),
}

/// `k: None` targets whatever milestone the model says is current, which
/// keeps random sequences moving forward often enough to finish.
#[derive(Debug, Clone)]
pub enum Op {
    Drawing { blank_name: bool },
    Accept,
    Respond { k: Option<u8>, text: Text, key: Option<u8> },
    Advance,
    Override { k: Option<u8>, branch: &'static str },
    Comment { k: u8 },
    Abort,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Expect {
    Appended(usize),
    Reasked(u8),
    Duplicate,
    WrongState,
    Invalid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum M {
    Custom { gens: u32 },
    Await { k: u8, reasks: u8 },
    Gen { k: u8 },
    Complete,
    Aborted,
}

pub struct Model {
    state: M,
    chapters: u8,
    answered: [bool; 5],
    keys: HashSet<String>,
    branched: Vec<(u8, Vec<String>)>,
}

impl Model {
    pub fn new(outline: &StoryOutline) -> Model {
        let branched = outline
            .chapters
            .iter()
            .filter(|c| !c.branches.is_empty())
            .map(|c| (c.index, c.branches.iter().map(|b| b.branch_id.as_str().to_string()).collect()))
            .collect();
        Model { state: M::Custom { gens: 0 }, chapters: 0, answered: [false; 5], keys: HashSet::new(), branched }
    }

    fn branches(&self, k: u8) -> Option<&Vec<String>> {
        self.branched.iter().find(|(i, _)| *i == k).map(|(_, b)| b)
    }

    fn current(&self) -> u8 {
        match self.state {
            M::Await { k, .. } | M::Gen { k } => k,
            _ => self.chapters + 1,
        }
    }

    pub fn is_complete(&self) -> bool {
        self.state == M::Complete
    }

    /// Expected result of `op`; updates the model when it succeeds.
    pub fn step(&mut self, op: &Op) -> Expect {
        let terminal = matches!(self.state, M::Complete | M::Aborted);
        match op {
            Op::Drawing { blank_name } => match self.state {
                M::Custom { gens } if !blank_name => {
                    self.state = M::Custom { gens: gens + 1 };
                    Expect::Appended(2)
                }
                M::Custom { .. } => Expect::Invalid,
                _ => Expect::WrongState,
            },
            Op::Accept => match self.state {
                M::Custom { gens } if gens > 0 => {
                    self.state = M::Await { k: 1, reasks: 0 };
                    Expect::Appended(2)
                }
                _ => Expect::WrongState,
            },
            Op::Respond { k, text, key } => {
                let k = k.unwrap_or_else(|| self.current());
                let key = key.map(|i| format!("key-{i}"));
                if key.as_ref().is_some_and(|key| self.keys.contains(key)) {
                    return Expect::Duplicate;
                }
                let M::Await { k: j, reasks } = self.state else { return Expect::WrongState };
                if j != k {
                    return Expect::WrongState;
                }
                if matches!(text, Text::Blank) && reasks < 2 {
                    self.state = M::Await { k, reasks: reasks + 1 };
                    return Expect::Reasked(reasks + 1);
                }
                if let Some(key) = key {
                    self.keys.insert(key);
                }
                self.answered[usize::from(k)] = true;
                self.state = M::Gen { k };
                Expect::Appended(if self.branches(k).is_some() { 2 } else { 1 })
            }
            Op::Advance => match self.state {
                M::Gen { k } if k < 4 => {
                    self.chapters = k;
                    self.state = M::Await { k: k + 1, reasks: 0 };
                    Expect::Appended(2)
                }
                M::Gen { .. } => {
                    self.chapters = 4;
                    self.state = M::Complete;
                    Expect::Appended(4)
                }
                _ => Expect::WrongState,
            },
            Op::Override { k, branch } => {
                let k = k.unwrap_or_else(|| self.current());
                if terminal || self.chapters >= k || self.state != (M::Gen { k }) {
                    return Expect::WrongState;
                }
                match self.branches(k) {
                    None => Expect::WrongState,
                    Some(ids) if ids.iter().any(|b| b == branch) => Expect::Appended(1),
                    Some(_) => Expect::Invalid,
                }
            }
            Op::Comment { k } => {
                if self.state != M::Aborted && self.answered.get(usize::from(*k)).copied().unwrap_or(false) {
                    Expect::Appended(1)
                } else {
                    Expect::WrongState
                }
            }
            Op::Abort => {
                if terminal {
                    Expect::WrongState
                } else {
                    self.state = M::Aborted;
                    Expect::Appended(1)
                }
            }
        }
    }
}

/// Runs `op` against the engine and reduces the result to an [`Expect`].
pub fn apply(engine: &Engine, s: &mut Session, drawing: &taleweave::assets::AssetRef, op: &Op, cur: u8) -> Expect {
    let before = s.event_log.len();
    let result: Result<Option<ResponseOutcome>, SessionError> = match op {
        Op::Drawing { blank_name } => {
            engine.submit_drawing(s, drawing.clone(), if *blank_name { "  " } else { "Bunny" }).map(|_| None)
        }
        Op::Accept => engine.accept_character(s).map(|_| None),
        Op::Respond { k, text, key } => {
            let text = match text {
                Text::Blank => String::new(),
                Text::Words(w) => w.to_string(),
            };
            let key = key.map(|i| format!("key-{i}"));
            engine.submit_response(s, k.unwrap_or(cur), ResponseInput::Typed(text), key.as_deref()).map(Some)
        }
        Op::Advance => engine.advance_generation(s).map(|_| None),
        Op::Override { k, branch } => {
            engine.override_branch(s, k.unwrap_or(cur), BranchId::new(*branch), "teacher").map(|_| None)
        }
        Op::Comment { k } => engine.add_comment(s, *k, "noted", "teacher").map(|_| None),
        Op::Abort => engine.abort(s, "stopped by test").map(|_| None),
    };
    let appended = s.event_log.len() - before;
    match result {
        Ok(Some(ResponseOutcome::Duplicate)) => {
            assert_eq!(appended, 0, "duplicate appended events");
            Expect::Duplicate
        }
        Ok(Some(ResponseOutcome::Reasked(n))) => {
            assert_eq!(appended, 1, "re-ask should append one event");
            Expect::Reasked(n)
        }
        Ok(_) => Expect::Appended(appended),
        Err(e) => {
            assert_eq!(appended, 0, "rejected {op:?} appended events: {e}");
            if e.is_wrong_state() {
                Expect::WrongState
            } else {
                Expect::Invalid
            }
        }
    }
}

/// Milestone the engine is on, for ops that target the current one.
pub fn engine_current(s: &Session) -> u8 {
    match s.state {
        SessionState::AwaitingResponse(k) | SessionState::GeneratingChapter(k) => k,
        _ => s.chapters.len() as u8 + 1,
    }
}

/// Structural checks on a finished session.
pub fn check_complete(s: &Session) -> Result<(), String> {
    let count = |name: &str| s.event_log.iter().filter(|e| e.event.name() == name).count();
    for (name, want) in [
        ("question_asked", 4),
        ("response_recorded", 4),
        ("chapter_generated", 4),
        ("reflection_generated", 1),
        ("analysis_generated", 1),
        ("completed", 1),
    ] {
        if count(name) != want {
            return Err(format!("{name}: {} events, expected {want}", count(name)));
        }
    }
    if s.milestones.len() != 4 || s.chapters.len() != 4 || s.reflection.is_none() || s.analysis.is_none() {
        return Err("derived state is not complete".into());
    }
    Ok(())
}

pub fn check_replay(s: &Session) -> Result<(), String> {
    let rebuilt = replay(&s.event_log).map_err(|e| e.to_string())?;
    if &rebuilt != s {
        return Err(format!("replay of {} differs from live state", s.session_id));
    }
    Ok(())
}

const POSITIVE: &str = "Take a deep breath and accept whatever score comes.";
const NEGATIVE: &str = "Forget about it.";
const NEUTRAL: &str = "Bunny looks at the paper.";

fn text() -> impl Strategy<Value = Text> {
    prop_oneof![
        1 => Just(Text::Blank),
        3 => Just(Text::Words(POSITIVE)),
        3 => Just(Text::Words(NEGATIVE)),
        3 => Just(Text::Words(NEUTRAL)),
    ]
}

fn some_k() -> impl Strategy<Value = u8> {
    0u8..=5
}

pub fn op() -> impl Strategy<Value = Op> {
    prop_oneof![
        2 => Just(Op::Drawing { blank_name: false }),
        1 => Just(Op::Drawing { blank_name: true }),
        4 => Just(Op::Accept),
        12 => (text(), proptest::option::weighted(0.5, 0u8..4)).prop_map(|(text, key)| Op::Respond { k: None, text, key }),
        1 => (some_k(), text(), proptest::option::of(0u8..4)).prop_map(|(k, text, key)| Op::Respond { k: Some(k), text, key }),
        12 => Just(Op::Advance),
        3 => prop_oneof![Just("calm"), Just("worried"), Just("honest"), Just("stormy"), Just("nowhere")]
            .prop_map(|branch| Op::Override { k: None, branch }),
        1 => (some_k(), Just("calm")).prop_map(|(k, branch)| Op::Override { k: Some(k), branch }),
        1 => some_k().prop_map(|k| Op::Comment { k }),
        1 => Just(Op::Abort),
    ]
}

pub fn ops(max: usize) -> impl Strategy<Value = Vec<Op>> {
    proptest::collection::vec(op(), 1..=max)
}

/// Plays `ops` against both the engine and the model. Returns whether the
/// session completed.
pub fn run_sequence(rig: &super::Rig, outline: &StoryOutline, seed: u64, ops: &[Op]) -> Result<bool, String> {
    let mut s = rig.session(outline, seed);
    let drawing = rig.drawing();
    let mut model = Model::new(outline);
    for (i, op) in ops.iter().enumerate() {
        let cur = engine_current(&s);
        let want = model.step(op);
        let got = apply(&rig.engine, &mut s, &drawing, op, cur);
        if got != want {
            return Err(format!("op {i} {op:?} in {}: engine {got:?}, model {want:?}", s.state));
        }
    }
    if model.is_complete() != (s.state == SessionState::Complete) {
        return Err(format!("model and engine disagree on completion: {}", s.state));
    }
    if s.state == SessionState::Complete {
        check_complete(&s)?;
    }
    check_replay(&s)?;
    Ok(s.state == SessionState::Complete)
}
