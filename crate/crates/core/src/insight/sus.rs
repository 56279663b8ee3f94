//! Scoring for the 13-item children's usability questionnaire.

use std::io::Read;

use super::{check_header, InsightError};
use crate::domain::{Benchmark, NormalityIssue, SusAnalysis, SusResponse, SUS_ITEM_COUNT};

/// 1-based positions of negatively worded items.
pub const NEGATIVE_ITEMS: [usize; 5] = [2, 4, 6, 8, 10];
/// Largest possible raw sum: 13 items × 4.
pub const MAX_RAW: u32 = 4 * SUS_ITEM_COUNT as u32;

pub fn is_negative(item: usize) -> bool {
    NEGATIVE_ITEMS.contains(&item)
}

fn check(resp: &SusResponse) -> Result<(), InsightError> {
    let err = |reason: String| InsightError::Sus { respondent: resp.respondent_id.clone(), reason };
    if resp.items.len() != SUS_ITEM_COUNT {
        return Err(err(format!("expected {SUS_ITEM_COUNT} items, found {}", resp.items.len())));
    }
    if let Some((i, v)) = resp.items.iter().enumerate().find(|(_, v)| !(1..=5).contains(*v)) {
        return Err(err(format!("item q{} = {v} is outside 1..5", i + 1)));
    }
    Ok(())
}

/// Raw contribution sum in `0..=52`.
pub fn sus_raw(resp: &SusResponse) -> Result<u32, InsightError> {
    check(resp)?;
    Ok(resp
        .items
        .iter()
        .enumerate()
        .map(|(i, &v)| if is_negative(i + 1) { 5 - u32::from(v) } else { u32::from(v) - 1 })
        .sum())
}

/// Score in `[0, 100]`.
pub fn sus_score(resp: &SusResponse) -> Result<f64, InsightError> {
    Ok(100.0 * f64::from(sus_raw(resp)?) / f64::from(MAX_RAW))
}

/// Mean, sample SD, normality test and benchmark. With fewer than three
/// respondents, or identical scores, the normality fields stay empty and
/// `normality_issue` says why.
pub fn sus_stats(responses: &[SusResponse]) -> Result<SusAnalysis, InsightError> {
    if responses.is_empty() {
        return Err(InsightError::Empty);
    }
    let scores = responses.iter().map(sus_score).collect::<Result<Vec<_>, _>>()?;
    let n = scores.len() as f64;
    let mean = scores.iter().sum::<f64>() / n;
    let sd = if scores.len() > 1 {
        (scores.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    let (shapiro, normality_issue) = if sd == 0.0 && scores.len() >= super::shapiro::MIN_N {
        (None, Some(NormalityIssue::DegenerateSample))
    } else {
        match super::shapiro_wilk(&scores) {
            Ok(sw) => (Some(sw), None),
            Err(issue) => (None, Some(issue)),
        }
    };
    Ok(SusAnalysis { scores, mean, sd, shapiro, normality_issue, benchmark: Benchmark::classify(mean) })
}

/// Reads `respondent_id,q1,…,q13` rows.
pub fn read_sus_csv(input: impl Read) -> Result<Vec<SusResponse>, InsightError> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let mut expected = vec!["respondent_id".to_string()];
    expected.extend((1..=SUS_ITEM_COUNT).map(|i| format!("q{i}")));
    check_header(&mut reader, &expected)?;
    let mut out = Vec::new();
    for record in reader.records() {
        let record = record.map_err(InsightError::from_csv)?;
        let line = record.position().map_or(0, |p| p.line());
        let bad = |message: String| InsightError::Csv { line, message };
        if record.len() != SUS_ITEM_COUNT + 1 {
            return Err(bad(format!("expected {} fields, found {}", SUS_ITEM_COUNT + 1, record.len())));
        }
        let items = record
            .iter()
            .skip(1)
            .enumerate()
            .map(|(i, f)| f.parse::<u8>().map_err(|_| bad(format!("q{} is not an integer: {f:?}", i + 1))))
            .collect::<Result<Vec<_>, _>>()?;
        let resp = SusResponse { respondent_id: record[0].to_string(), items };
        check(&resp).map_err(|e| bad(e.to_string()))?;
        out.push(resp);
    }
    Ok(out)
}

/// Plain-text summary of an analysis.
pub fn render_sus_report(analysis: &SusAnalysis) -> String {
    let mut out = format!(
        "respondents: {}\nmean: {:.2}\nsd: {:.2}\n",
        analysis.scores.len(),
        analysis.mean,
        analysis.sd
    );
    match (&analysis.shapiro, analysis.normality_issue) {
        (Some(sw), _) => out.push_str(&format!("shapiro_wilk: W = {:.3}, p = {:.3}\n", sw.w, sw.p)),
        (None, Some(issue)) => out.push_str(&format!("shapiro_wilk: not computed ({issue:?})\n")),
        (None, None) => {}
    }
    out.push_str(&format!("benchmark: {}\n", analysis.benchmark));
    out
}
