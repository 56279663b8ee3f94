use std::fmt;

use serde::{Deserialize, Serialize};

pub const SUS_ITEM_COUNT: usize = 13;

/// One child's answers to the 13-item usability questionnaire, each 1..=5.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SusResponse {
    pub respondent_id: String,
    pub items: Vec<u8>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Benchmark {
    Poor,
    Ok,
    Good,
    Excellent,
    BestImaginable,
}

impl Benchmark {
    pub fn classify(score: f64) -> Self {
        if score >= 84.1 {
            Benchmark::BestImaginable
        } else if score >= 80.8 {
            Benchmark::Excellent
        } else if score >= 71.4 {
            Benchmark::Good
        } else if score >= 51.0 {
            Benchmark::Ok
        } else {
            Benchmark::Poor
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Benchmark::Poor => "poor",
            Benchmark::Ok => "ok",
            Benchmark::Good => "good",
            Benchmark::Excellent => "excellent",
            Benchmark::BestImaginable => "best_imaginable",
        }
    }
}

impl fmt::Display for Benchmark {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShapiroWilk {
    pub w: f64,
    pub p: f64,
}

/// Why the normality test was not reported.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormalityIssue {
    TooFewSamples,
    TooManySamples,
    DegenerateSample,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SusAnalysis {
    pub scores: Vec<f64>,
    pub mean: f64,
    pub sd: f64,
    pub shapiro: Option<ShapiroWilk>,
    pub normality_issue: Option<NormalityIssue>,
    pub benchmark: Benchmark,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reported_group_mean_is_excellent() {
        assert_eq!(Benchmark::classify(81.09), Benchmark::Excellent);
    }

    #[test]
    fn thresholds_are_inclusive() {
        assert_eq!(Benchmark::classify(84.1), Benchmark::BestImaginable);
        assert_eq!(Benchmark::classify(80.8), Benchmark::Excellent);
        assert_eq!(Benchmark::classify(71.4), Benchmark::Good);
        assert_eq!(Benchmark::classify(51.0), Benchmark::Ok);
        assert_eq!(Benchmark::classify(50.99), Benchmark::Poor);
    }
}
