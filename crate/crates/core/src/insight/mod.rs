//! Analysis instruments: coping-strategy coding and usability statistics.

mod coping;
mod shapiro;
mod sus;

pub use coping::{
    aggregate_coping, read_coping_csv, tag_response, CodedResponse, CopingDistribution, TagMode,
    TagOutcome, TagSet, DISTRIBUTION_DOCUMENT,
};
pub use shapiro::shapiro_wilk;
pub use sus::{
    is_negative, read_sus_csv, render_sus_report, sus_raw, sus_score, sus_stats, MAX_RAW,
    NEGATIVE_ITEMS,
};

use crate::agents::AgentError;
use crate::domain::ResponseCode;

#[derive(Debug, thiserror::Error)]
pub enum InsightError {
    #[error("respondent {respondent}: {reason}")]
    Sus { respondent: String, reason: String },
    #[error("no responses")]
    Empty,
    #[error("response code {0} appears more than once")]
    DuplicateCode(ResponseCode),
    #[error("line {line}: {message}")]
    Csv { line: u64, message: String },
    #[error(transparent)]
    Agent(#[from] AgentError),
}

impl InsightError {
    fn from_csv(e: csv::Error) -> Self {
        let line = e.position().map_or(0, |p| p.line());
        InsightError::Csv { line, message: e.to_string() }
    }
}

fn check_header<R: std::io::Read>(
    reader: &mut csv::Reader<R>,
    expected: &[String],
) -> Result<(), InsightError> {
    let header = reader.headers().map_err(InsightError::from_csv)?;
    let found: Vec<&str> = header.iter().collect();
    if found != expected.iter().map(String::as_str).collect::<Vec<_>>() {
        return Err(InsightError::Csv {
            line: 1,
            message: format!("expected header {}, found {}", expected.join(","), found.join(",")),
        });
    }
    Ok(())
}
