//! Records provider exchanges to a cassette, then serves the same requests
//! from the cassette without the original providers.

use std::error::Error;
use std::sync::Arc;

use taleweave::assets::AssetStore;
use taleweave::provider::{
    record_cassette, AgentRole, Gateway, RecordedRequest, ReplayProvider, TextProvider, TextRequest,
};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let dir = tempfile::tempdir()?;
    let assets = Arc::new(AssetStore::open(dir.path())?);
    let path = dir.path().join("session.cassette.json");

    let question = TextRequest::new(AgentRole::Question, "Ask the child what happens next.")
        .with("protagonist", "Bunny")
        .with("chapter_setting", "The exam hall")
        .with("chapter_plot", "Bunny finds a question it cannot solve.");
    let cassette = record_cassette(
        Gateway::mock(9, assets.clone()),
        &path,
        &[
            RecordedRequest::Text(question.clone()),
            RecordedRequest::Speech { text: "What will Bunny do?".into(), voice_profile: "storyteller".into() },
        ],
    )?;
    println!("recorded {} exchange(s) to {}", cassette.entries.len(), path.display());

    let replay = ReplayProvider::open(&path, assets)?;
    let live = Gateway::mock(9, Arc::new(AssetStore::open(dir.path())?)).generate_text(&question)?;
    let replayed = replay.generate_text(&question)?;
    println!("{}", replayed.text);
    assert_eq!(replayed.text, live.text);

    let unknown = TextRequest::new(AgentRole::Question, "never recorded");
    assert!(replay.generate_text(&unknown).is_err());
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
