use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;
use std::io::Read;

use serde::{Deserialize, Serialize};

use super::{check_header, InsightError};
use crate::agents::Agents;
use crate::canon::{self, CanonError};
use crate::domain::{
    AgentTrace, CopingDimension, CopingSubscale, CopingTag, ResponseCode, TagOrigin,
};

pub const DISTRIBUTION_DOCUMENT: &str = "coping_distribution";

pub enum TagMode<'a> {
    Manual(CopingSubscale),
    /// Ask the text provider; advisory only.
    Suggested(&'a Agents),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TagOutcome {
    Tagged { tag: CopingTag, trace: Option<AgentTrace> },
    /// The classifier gave no valid subscale; a person must decide.
    Unresolved { code: ResponseCode, trace: AgentTrace },
}

impl TagOutcome {
    pub fn tag(&self) -> Option<&CopingTag> {
        match self {
            TagOutcome::Tagged { tag, .. } => Some(tag),
            TagOutcome::Unresolved { .. } => None,
        }
    }
}

pub fn tag_response(
    code: ResponseCode,
    response_text: &str,
    mode: TagMode<'_>,
) -> Result<TagOutcome, InsightError> {
    match mode {
        TagMode::Manual(subscale) => Ok(TagOutcome::Tagged {
            tag: CopingTag::new(code, subscale, TagOrigin::Manual),
            trace: None,
        }),
        TagMode::Suggested(agents) => {
            let suggestion = agents.suggest_coping(response_text)?;
            Ok(match suggestion.subscale {
                Some(subscale) => TagOutcome::Tagged {
                    tag: CopingTag::new(code, subscale, TagOrigin::Suggested),
                    trace: Some(suggestion.trace),
                },
                None => TagOutcome::Unresolved { code, trace: suggestion.trace },
            })
        }
    }
}

/// Tags keyed by response code. A suggested tag never replaces a manual one.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TagSet {
    tags: BTreeMap<ResponseCode, CopingTag>,
}

impl TagSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns false when the tag was ignored in favour of a manual one.
    pub fn insert(&mut self, tag: CopingTag) -> bool {
        match self.tags.get(&tag.code) {
            Some(old) if old.origin == TagOrigin::Manual && tag.origin == TagOrigin::Suggested => false,
            _ => {
                self.tags.insert(tag.code, tag);
                true
            }
        }
    }

    pub fn get(&self, code: &ResponseCode) -> Option<&CopingTag> {
        self.tags.get(code)
    }

    pub fn tags(&self) -> Vec<CopingTag> {
        self.tags.values().cloned().collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CopingDistribution {
    /// Every subscale, zeros included.
    pub subscale_counts: BTreeMap<CopingSubscale, usize>,
    pub dimension_counts: BTreeMap<CopingDimension, usize>,
    /// Child index → subscales that child used.
    pub presence: BTreeMap<u32, BTreeSet<CopingSubscale>>,
    pub codes: BTreeMap<CopingSubscale, Vec<ResponseCode>>,
    pub total: usize,
}

impl CopingDistribution {
    pub fn count(&self, subscale: CopingSubscale) -> usize {
        self.subscale_counts.get(&subscale).copied().unwrap_or(0)
    }

    pub fn dimension(&self, dimension: CopingDimension) -> usize {
        self.dimension_counts.get(&dimension).copied().unwrap_or(0)
    }

    /// Children whose tags include `subscale`.
    pub fn children_using(&self, subscale: CopingSubscale) -> BTreeSet<u32> {
        self.presence.iter().filter(|(_, s)| s.contains(&subscale)).map(|(c, _)| *c).collect()
    }

    pub fn to_document(&self) -> Result<String, CanonError> {
        canon::to_document(DISTRIBUTION_DOCUMENT, self)
    }

    pub fn from_document(text: &str) -> Result<Self, CanonError> {
        canon::from_document(DISTRIBUTION_DOCUMENT, text)
    }

    /// Dimension / subscale / count / codes, one row per subscale.
    pub fn render_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{:<30} {:<30} {:>5}  Codes", "Dimension", "Subscale", "Count");
        for dim in CopingDimension::ALL {
            for (i, sub) in dim.subscales().enumerate() {
                let codes = self
                    .codes
                    .get(&sub)
                    .map(|c| c.iter().map(ToString::to_string).collect::<Vec<_>>().join(", "))
                    .unwrap_or_default();
                let dim_label = if i == 0 { dim.label() } else { "" };
                let line = format!("{:<30} {:<30} {:>5}  {}", dim_label, sub.label(), self.count(sub), codes);
                let _ = writeln!(out, "{}", line.trim_end());
            }
        }
        let _ = writeln!(out, "{:<30} {:<30} {:>5}", "Total", "", self.total);
        out
    }
}

pub fn aggregate_coping(tags: &[CopingTag]) -> Result<CopingDistribution, InsightError> {
    let mut seen = BTreeSet::new();
    let mut dist = CopingDistribution {
        subscale_counts: CopingSubscale::ALL.into_iter().map(|s| (s, 0)).collect(),
        dimension_counts: CopingDimension::ALL.into_iter().map(|d| (d, 0)).collect(),
        presence: BTreeMap::new(),
        codes: BTreeMap::new(),
        total: 0,
    };
    for tag in tags {
        if !seen.insert(tag.code) {
            return Err(InsightError::DuplicateCode(tag.code));
        }
        *dist.subscale_counts.entry(tag.subscale).or_default() += 1;
        *dist.dimension_counts.entry(tag.subscale.dimension()).or_default() += 1;
        dist.presence.entry(tag.code.child).or_default().insert(tag.subscale);
        dist.codes.entry(tag.subscale).or_default().push(tag.code);
        dist.total += 1;
    }
    for codes in dist.codes.values_mut() {
        codes.sort();
    }
    Ok(dist)
}

/// One row of a coded-response file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodedResponse {
    pub code: ResponseCode,
    pub subscale: CopingSubscale,
    pub text: String,
}

impl CodedResponse {
    pub fn tag(&self) -> CopingTag {
        CopingTag::new(self.code, self.subscale, TagOrigin::Manual)
    }
}

/// Reads `code,subscale,text` rows.
pub fn read_coping_csv(input: impl Read) -> Result<Vec<CodedResponse>, InsightError> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    check_header(&mut reader, &["code".into(), "subscale".into(), "text".into()])?;
    let mut out = Vec::new();
    for record in reader.records() {
        let record = record.map_err(InsightError::from_csv)?;
        let line = record.position().map_or(0, |p| p.line());
        let bad = |message: String| InsightError::Csv { line, message };
        if record.len() != 3 {
            return Err(bad(format!("expected 3 fields, found {}", record.len())));
        }
        let code = record[0].parse::<ResponseCode>().map_err(|e| bad(e.to_string()))?;
        let subscale = record[1].parse::<CopingSubscale>().map_err(|e| bad(e.to_string()))?;
        out.push(CodedResponse { code, subscale, text: record[2].to_string() });
    }
    Ok(out)
}
