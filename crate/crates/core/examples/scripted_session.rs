//! Plays the C1 corpus fixture end to end with mock providers and prints
//! the run summary and the annotated storybook.

use std::error::Error;
use std::fs;
use std::path::Path;

use taleweave::domain::{SessionState, StoryOutline};
use taleweave::sim::{self, ResponseScript, SimOptions};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let fixture = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/corpus/c01");
    let outline = StoryOutline::from_document(&fs::read_to_string(fixture.join("outline.json"))?)?;
    let script = ResponseScript::load(&fixture.join("script.json"))?;

    let out = tempfile::tempdir()?;
    let run = sim::run(&outline, &script, SimOptions::seeded(7), out.path())?;
    println!(
        "{}: {} after {} events, {} chapters",
        run.summary.session_id, run.summary.state, run.summary.event_count, run.summary.chapters
    );
    assert_eq!(run.session.state, SessionState::Complete);

    let annotated = run.summary.exports.iter().find(|p| p.ends_with("annotated.txt")).expect("annotated export");
    println!("{}", fs::read_to_string(out.path().join(annotated))?);
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
