//! Drives the engine by hand on the C6 fixture. The chapter-3 answer picks
//! the positive branch; the teacher overrides it before the chapter is
//! written.

use std::error::Error;
use std::fs;
use std::path::Path;
use std::sync::Arc;

use taleweave::agents::{Agents, TemplateSet};
use taleweave::assets::AssetStore;
use taleweave::domain::{SessionState, SteppingClock, StoryOutline, TaskId, Timestamp};
use taleweave::provider::Gateway;
use taleweave::session::{Engine, ResponseInput, SessionTask};
use taleweave::sim::ResponseScript;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let fixture = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/corpus/c06");
    let outline = StoryOutline::from_document(&fs::read_to_string(fixture.join("outline.json"))?)?;
    let script = ResponseScript::load(&fixture.join("script.json"))?;

    let dir = tempfile::tempdir()?;
    let assets = Arc::new(AssetStore::open(dir.path())?);
    let agents = Agents::new(Gateway::mock(3, assets.clone()), TemplateSet::builtin());
    let engine = Engine::new(agents, Arc::new(SteppingClock::default()), "storyteller");

    let task = SessionTask::deploy(TaskId::new("tsk_c6"), &outline, "C6", Timestamp::from_millis(0))
        .map_err(|v| v.to_string())?;
    let mut s = engine.open(&task, 3, Some("device-1".into()));
    engine.submit_drawing(&mut s, assets.import(&script.drawing)?, &script.name)?;
    engine.accept_character(&mut s)?;

    for k in 1..=4u8 {
        let text = script.responses[usize::from(k) - 1].clone();
        engine.submit_response(&mut s, k, ResponseInput::Typed(text.clone()), None)?;
        if k == 3 {
            let picked = s.milestone(3).and_then(|m| m.selected_branch.clone());
            println!("\"{text}\" selects {picked:?}");
            engine.override_branch(&mut s, 3, "stormy".into(), "teacher")?;
        }
        engine.advance_generation(&mut s)?;
    }
    assert_eq!(s.state, SessionState::Complete);
    let chapter3 = &s.chapters[2];
    println!("chapter 3 followed {:?}:", chapter3.branch);
    for p in &chapter3.paragraphs {
        println!("  {p}");
    }
    assert_eq!(chapter3.branch.as_ref().map(|b| b.as_str()), Some("stormy"));
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
