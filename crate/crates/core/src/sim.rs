//! Headless sessions driven by a scripted child.
//!
//! A [`ResponseScript`] names the protagonist, points at a drawing and lists
//! the four milestone responses. [`run`] plays it through the engine with
//! mock providers and writes the session log, both storybook variants in
//! every format, and a summary into one output directory.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::agents::{Agents, TemplateSet};
use crate::assets::{AssetError, AssetStore};
use crate::canon::{self, CanonError};
use crate::domain::{
    new_id, Clock, Session, SessionState, SteppingClock, StoryOutline, TaskId, ValidationResult,
    CHAPTER_COUNT,
};
use crate::provider::Gateway;
use crate::session::{
    write_log, Engine, LogError, ResponseInput, ResponseOutcome, SessionError, SessionTask,
    MAX_REASKS,
};
use crate::storybook::{self, ExportFormat, StorybookError, Variant};

pub const SCRIPT_DOCUMENT: &str = "response_script";
pub const SUMMARY_DOCUMENT: &str = "sim_summary";
pub const SUMMARY_FILE: &str = "summary.json";

/// One child's side of a session.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResponseScript {
    pub name: String,
    /// Relative to the script file.
    pub drawing: PathBuf,
    pub responses: Vec<String>,
    #[serde(default)]
    pub child_label: Option<String>,
}

impl ResponseScript {
    pub fn load(path: &Path) -> Result<Self, SimError> {
        let text = fs::read_to_string(path).map_err(|e| SimError::Input(format!("{}: {e}", path.display())))?;
        let mut script: ResponseScript = canon::from_document(SCRIPT_DOCUMENT, &text)
            .map_err(|e| SimError::Input(format!("{}: {e}", path.display())))?;
        if script.drawing.is_relative() {
            script.drawing = path.parent().unwrap_or(Path::new(".")).join(&script.drawing);
        }
        Ok(script)
    }

    pub fn to_document(&self) -> Result<String, CanonError> {
        canon::to_document(SCRIPT_DOCUMENT, self)
    }

    pub fn check(&self) -> Result<(), SimError> {
        if self.name.trim().is_empty() {
            return Err(SimError::Input("script has an empty protagonist name".into()));
        }
        if self.responses.len() != CHAPTER_COUNT {
            return Err(SimError::Input(format!(
                "script needs exactly {CHAPTER_COUNT} responses, found {}",
                self.responses.len()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error("{0}")]
    Input(String),
    #[error("outline is invalid:\n{0}")]
    Outline(ValidationResult),
    #[error(transparent)]
    Session(#[from] SessionError),
    #[error(transparent)]
    Storybook(#[from] StorybookError),
    #[error(transparent)]
    Log(#[from] LogError),
    #[error(transparent)]
    Asset(#[from] AssetError),
    #[error(transparent)]
    Encode(#[from] CanonError),
    #[error("output I/O: {0}")]
    Io(#[from] std::io::Error),
}

impl SimError {
    /// Bad input rather than a pipeline failure.
    pub fn is_input(&self) -> bool {
        matches!(self, SimError::Input(_) | SimError::Outline(_))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimSummary {
    pub session_id: String,
    pub state: SessionState,
    pub event_count: usize,
    pub chapters: usize,
    pub seed: u64,
    pub session_log: PathBuf,
    /// Relative to the output directory.
    pub exports: Vec<PathBuf>,
}

/// Everything a run produced.
#[derive(Debug, Clone)]
pub struct SimRun {
    pub session: Session,
    pub summary: SimSummary,
}

/// Options beyond the script and outline.
#[derive(Clone)]
pub struct SimOptions {
    pub seed: u64,
    pub clock: Arc<dyn Clock>,
    /// Overrides the all-mock gateway, e.g. for fault injection.
    pub gateway: Option<Gateway>,
}

impl SimOptions {
    /// All-mock providers and a fixed stepping clock.
    pub fn seeded(seed: u64) -> Self {
        Self { seed, clock: Arc::new(SteppingClock::default()), gateway: None }
    }
}

fn drive(engine: &Engine, s: &mut Session, script: &ResponseScript, drawing: crate::assets::AssetRef) -> Result<(), SessionError> {
    engine.submit_drawing(s, drawing, &script.name)?;
    engine.accept_character(s)?;
    for (i, text) in script.responses.iter().enumerate() {
        let k = i as u8 + 1;
        let key = format!("sim-{k}");
        // Blank script entries stand for silence and run through the re-asks.
        for _ in 0..=MAX_REASKS {
            let outcome = engine.submit_response(s, k, ResponseInput::Typed(text.clone()), Some(&key))?;
            if !matches!(outcome, ResponseOutcome::Reasked(_)) {
                break;
            }
        }
        loop {
            match engine.advance_generation(s) {
                Ok(()) => break,
                Err(SessionError::GenerationFailed { aborted: false, .. }) => continue,
                Err(e) => return Err(e),
            }
        }
    }
    Ok(())
}

/// Plays `script` against `outline` and writes all artifacts under `out`.
pub fn run(
    outline: &StoryOutline,
    script: &ResponseScript,
    options: SimOptions,
    out: &Path,
) -> Result<SimRun, SimError> {
    script.check()?;
    if !script.drawing.is_file() {
        return Err(SimError::Input(format!("drawing {} does not exist", script.drawing.display())));
    }
    fs::create_dir_all(out)?;
    let assets = Arc::new(AssetStore::open(out)?);
    let gateway = options.gateway.clone().unwrap_or_else(|| Gateway::mock(options.seed, assets.clone()));
    let engine = Engine::new(Agents::new(gateway, TemplateSet::builtin()), options.clock.clone(), "storyteller");

    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let task_id = TaskId::new(new_id("tsk", options.clock.now(), &mut rng));
    let label = script.child_label.clone().unwrap_or_else(|| script.name.clone());
    let task = SessionTask::deploy(task_id, outline, &label, options.clock.now()).map_err(SimError::Outline)?;
    let mut session = engine.open(&task, options.seed, Some("sim".into()));
    let drawing = assets.import(&script.drawing)?;

    let driven = drive(&engine, &mut session, script, drawing);
    let log_rel = PathBuf::from("sessions").join(format!("{}.log", session.session_id));
    write_log(&out.join(&log_rel), &session.event_log)?;
    driven?;

    let mut exports = Vec::new();
    for variant in [Variant::Print, Variant::Annotated] {
        let book = storybook::compile(&session, variant)?;
        for format in ExportFormat::ALL {
            storybook::export(&book, format, out)?;
            exports.push(storybook::export_path(&session.session_id, variant, format));
        }
    }
    let summary = SimSummary {
        session_id: session.session_id.to_string(),
        state: session.state,
        event_count: session.event_log.len(),
        chapters: session.chapters.len(),
        seed: options.seed,
        session_log: log_rel,
        exports,
    };
    fs::write(out.join(SUMMARY_FILE), canon::to_document(SUMMARY_DOCUMENT, &summary)?)?;
    Ok(SimRun { session, summary })
}
