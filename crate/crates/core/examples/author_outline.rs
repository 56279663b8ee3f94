//! Drafts an outline from a teacher's brief, revises it, adds a two-way
//! branch at chapter 3 and deploys it.

use std::error::Error;
use std::sync::Arc;

use taleweave::agents::{Agents, TemplateSet};
use taleweave::assets::AssetStore;
use taleweave::domain::{
    validate_outline, validate_revision, BranchSpec, Clock, OutlineId, SteppingClock, Valence,
};
use taleweave::provider::Gateway;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let scratch = tempfile::tempdir()?;
    let assets = Arc::new(AssetStore::open(scratch.path())?);
    let agents = Agents::new(Gateway::mock(11, assets), TemplateSet::builtin());
    let clock = SteppingClock::default();

    let (draft, trace) = agents.outline(
        OutlineId::new("out_exam"),
        "final-exam anxiety; rabbit protagonist",
        "Anxiety-prone with high academic pressure from parents",
        clock.now(),
    )?;
    println!("{} (v{}) from {} attempt(s)", draft.title, draft.version, trace.attempts);
    for chapter in &draft.chapters {
        println!("  {}. {}", chapter.index, chapter.setting);
    }
    assert!(validate_outline(&draft).is_ok());

    let (rewritten, _) =
        agents.rewrite_chapter(&draft, 2, "make the exam questions feel less scary", clock.now())?;
    let branched = rewritten.edited(clock.now(), |o| {
        o.chapters[2].branches = vec![
            BranchSpec {
                branch_id: "calm".into(),
                valence: Valence::Positive,
                setting: "The exam hall, the last twenty minutes".into(),
                plot: "The protagonist settles down and tries the hard questions again.".into(),
            },
            BranchSpec {
                branch_id: "worried".into(),
                valence: Valence::Negative,
                setting: "The exam hall, the last twenty minutes".into(),
                plot: "The worry grows until the bell, and mom helps afterwards.".into(),
            },
        ];
    });
    let check = validate_revision(&rewritten, &branched);
    println!("v{} with branches: {check}", branched.version);
    assert!(check.is_ok());

    let deployed = branched.deployed();
    let mut tampered = deployed.clone();
    tampered.chapters[0].plot = "changed after deploy".into();
    let refused = validate_revision(&deployed, &tampered);
    println!("in-place edit of a deployed outline: {refused}");
    assert!(!refused.is_ok());

    let next = deployed.edited(clock.now(), |o| o.chapters[0].plot = "changed in a new draft".into());
    assert!(validate_revision(&deployed, &next).is_ok());
    println!("edits land in draft v{}", next.version);
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
