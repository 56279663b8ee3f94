//! Aggregates the 48 coded milestone responses into the coping-strategy
//! distribution, then asks the mock classifier about a new response.

use std::error::Error;
use std::fs::File;
use std::path::Path;
use std::sync::Arc;

use taleweave::agents::{Agents, TemplateSet};
use taleweave::assets::AssetStore;
use taleweave::domain::{CopingSubscale, ResponseCode};
use taleweave::insight::{aggregate_coping, read_coping_csv, tag_response, TagMode, TagOutcome};
use taleweave::provider::Gateway;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let csv = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/coping_codes.csv");
    let rows = read_coping_csv(File::open(csv)?)?;
    let tags: Vec<_> = rows.iter().map(|r| r.tag()).collect();
    let dist = aggregate_coping(&tags)?;
    print!("{}", dist.render_table());
    assert_eq!(dist.count(CopingSubscale::DirectProblemSolving), 28);
    println!(
        "children using direct problem solving: {}",
        dist.children_using(CopingSubscale::DirectProblemSolving).len()
    );

    let scratch = tempfile::tempdir()?;
    let agents = Agents::new(Gateway::mock(0, Arc::new(AssetStore::open(scratch.path())?)), TemplateSet::builtin());
    let code = ResponseCode::parse("C13-1")?;
    match tag_response(code, "Ask the teacher for help with the hard question.", TagMode::Suggested(&agents))? {
        TagOutcome::Tagged { tag, .. } => println!("{code}: suggested {}", tag.subscale.label()),
        TagOutcome::Unresolved { .. } => println!("{code}: needs a person to decide"),
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
