//! Scores a usability questionnaire file and checks the scores for
//! normality before reporting mean and spread.

use std::error::Error;
use std::fs::File;
use std::path::Path;

use taleweave::domain::{Benchmark, SusResponse};
use taleweave::insight::{read_sus_csv, render_sus_report, shapiro_wilk, sus_score, sus_stats};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let csv = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/sus_sample.csv");
    let responses = read_sus_csv(File::open(csv)?)?;
    for r in responses.iter().take(3) {
        println!("{}: {:.2}", r.respondent_id, sus_score(r)?);
    }
    let analysis = sus_stats(&responses)?;
    print!("{}", render_sus_report(&analysis));

    let neutral = SusResponse { respondent_id: "neutral".into(), items: vec![3; 13] };
    assert_eq!(sus_score(&neutral)?, 50.0);
    assert_eq!(Benchmark::classify(81.09), Benchmark::Excellent);

    let sw = shapiro_wilk(&analysis.scores).map_err(|issue| format!("{issue:?}"))?;
    println!("W = {:.4}, p = {:.4}", sw.w, sw.p);
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
