//! Compiles both storybook variants from a finished session, with a teacher
//! comment on milestone 2, and writes every export format.

use std::error::Error;
use std::fs;
use std::path::Path;
use std::sync::Arc;

use taleweave::agents::{Agents, TemplateSet};
use taleweave::assets::AssetStore;
use taleweave::domain::{SteppingClock, StoryOutline};
use taleweave::provider::Gateway;
use taleweave::session::{read_log, replay, Engine};
use taleweave::sim::{self, ResponseScript, SimOptions};
use taleweave::storybook::{self, Book, ExportFormat, Variant};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let fixture = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/corpus/c05");
    let outline = StoryOutline::from_document(&fs::read_to_string(fixture.join("outline.json"))?)?;
    let script = ResponseScript::load(&fixture.join("script.json"))?;
    let out = tempfile::tempdir()?;
    let run = sim::run(&outline, &script, SimOptions::seeded(5), out.path())?;

    // The log alone is enough to rebuild the session.
    let mut session = replay(&read_log(&out.path().join(&run.summary.session_log))?)?;
    assert_eq!(session, run.session);

    let assets = Arc::new(AssetStore::open(out.path())?);
    let agents = Agents::new(Gateway::mock(5, assets), TemplateSet::builtin());
    let engine = Engine::new(agents, Arc::new(SteppingClock::default()), "storyteller");
    engine.add_comment(&mut session, 2, "Noting apologised before anyone asked. Praise that at home.", "teacher")?;

    for variant in [Variant::Print, Variant::Annotated] {
        let book = storybook::compile(&session, variant)?;
        println!("{variant:?}: {} pages", book.storybook().page_count());
        for format in ExportFormat::ALL {
            let path = storybook::export(&book, format, out.path())?;
            println!("  {}", path.strip_prefix(out.path())?.display());
        }
        let round_trip = Book::from_interchange(&book.to_interchange()?)?;
        assert_eq!(round_trip, book);
    }

    let annotated = storybook::compile(&session, Variant::Annotated)?;
    let text = storybook::render_plain_text(&annotated);
    assert!(text.contains("Praise that at home."));
    println!("{}", text.lines().skip_while(|l| !l.starts_with("[Milestone 2]")).take(5).collect::<Vec<_>>().join("\n"));
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
