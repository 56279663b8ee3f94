use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{BranchId, OutlineId, Timestamp};

pub const CHAPTER_COUNT: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutlineStatus {
    Draft,
    Deployed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Valence {
    Positive,
    Negative,
    Neutral,
}

impl Valence {
    pub fn as_str(self) -> &'static str {
        match self {
            Valence::Positive => "positive",
            Valence::Negative => "negative",
            Valence::Neutral => "neutral",
        }
    }

    pub fn parse(text: &str) -> Option<Self> {
        match text.trim().to_ascii_lowercase().as_str() {
            "positive" => Some(Valence::Positive),
            "negative" => Some(Valence::Negative),
            "neutral" => Some(Valence::Neutral),
            _ => None,
        }
    }
}

impl fmt::Display for Valence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BranchSpec {
    pub branch_id: BranchId,
    pub valence: Valence,
    pub setting: String,
    pub plot: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChapterSpec {
    pub index: u8,
    pub setting: String,
    pub plot: String,
    #[serde(default)]
    pub branches: Vec<BranchSpec>,
}

impl ChapterSpec {
    pub fn linear(index: u8, setting: impl Into<String>, plot: impl Into<String>) -> Self {
        Self { index, setting: setting.into(), plot: plot.into(), branches: Vec::new() }
    }

    pub fn branch(&self, id: &BranchId) -> Option<&BranchSpec> {
        self.branches.iter().find(|b| &b.branch_id == id)
    }

    pub fn has_branches(&self) -> bool {
        !self.branches.is_empty()
    }
}

/// Expert-authored four-chapter plan.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StoryOutline {
    pub outline_id: OutlineId,
    pub title: String,
    pub brief: String,
    pub child_profile_note: String,
    pub chapters: Vec<ChapterSpec>,
    pub status: OutlineStatus,
    pub version: u32,
    pub created_at: Timestamp,
    pub updated_at: Timestamp,
}

pub const OUTLINE_DOCUMENT: &str = "story_outline";

impl StoryOutline {
    pub fn chapter(&self, k: u8) -> Option<&ChapterSpec> {
        self.chapters.get(usize::from(k).checked_sub(1)?)
    }

    pub fn is_deployed(&self) -> bool {
        self.status == OutlineStatus::Deployed
    }

    /// Applies `edit` to a copy of this outline and returns it as the next
    /// draft version. The receiver is never modified, so a deployed outline
    /// stays byte-stable while the edit lands in a new draft.
    pub fn edited(&self, at: Timestamp, edit: impl FnOnce(&mut StoryOutline)) -> StoryOutline {
        let mut next = self.clone();
        edit(&mut next);
        next.outline_id = self.outline_id.clone();
        next.status = OutlineStatus::Draft;
        next.version = self.version + 1;
        next.created_at = self.created_at;
        next.updated_at = at;
        next
    }

    /// Frozen copy marked deployed.
    pub fn deployed(&self) -> StoryOutline {
        let mut snapshot = self.clone();
        snapshot.status = OutlineStatus::Deployed;
        snapshot
    }

    pub fn to_document(&self) -> Result<String, crate::canon::CanonError> {
        crate::canon::to_document(OUTLINE_DOCUMENT, self)
    }

    pub fn from_document(text: &str) -> Result<Self, crate::canon::CanonError> {
        crate::canon::from_document(OUTLINE_DOCUMENT, text)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum Violation {
    ChapterCount { found: usize },
    ChapterIndex { position: usize, found: u8 },
    EmptyTitle,
    EmptySetting { chapter: u8 },
    EmptyPlot { chapter: u8 },
    EmptyBranchId { chapter: u8 },
    DuplicateBranchId { chapter: u8, branch_id: BranchId },
    BranchEmptySetting { chapter: u8, branch_id: BranchId },
    BranchEmptyPlot { chapter: u8, branch_id: BranchId },
    VersionZero,
    EditAfterDeploy { version: u32 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::ChapterCount { found } => {
                write!(f, "chapter count ≠ {CHAPTER_COUNT} (found {found})")
            }
            Violation::ChapterIndex { position, found } => {
                write!(f, "chapter at position {position} has index {found}")
            }
            Violation::EmptyTitle => f.write_str("title is empty"),
            Violation::EmptySetting { chapter } => write!(f, "chapter {chapter}: empty setting"),
            Violation::EmptyPlot { chapter } => write!(f, "chapter {chapter}: empty plot"),
            Violation::EmptyBranchId { chapter } => write!(f, "chapter {chapter}: empty branch id"),
            Violation::DuplicateBranchId { chapter, branch_id } => {
                write!(f, "chapter {chapter}: duplicate branch id {branch_id}")
            }
            Violation::BranchEmptySetting { chapter, branch_id } => {
                write!(f, "chapter {chapter}: branch {branch_id} has empty setting")
            }
            Violation::BranchEmptyPlot { chapter, branch_id } => {
                write!(f, "chapter {chapter}: branch {branch_id} has empty plot")
            }
            Violation::VersionZero => f.write_str("version must be ≥ 1"),
            Violation::EditAfterDeploy { version } => {
                write!(f, "edit-after-deploy: version {version} is deployed and immutable")
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationResult {
    pub violations: Vec<Violation>,
}

impl ValidationResult {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return f.write_str("ok");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("\n")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

pub fn validate_outline(outline: &StoryOutline) -> ValidationResult {
    let mut violations = Vec::new();
    if outline.title.trim().is_empty() {
        violations.push(Violation::EmptyTitle);
    }
    if outline.version == 0 {
        violations.push(Violation::VersionZero);
    }
    if outline.chapters.len() != CHAPTER_COUNT {
        violations.push(Violation::ChapterCount { found: outline.chapters.len() });
    }
    for (position, chapter) in outline.chapters.iter().enumerate() {
        let expected = position + 1;
        if usize::from(chapter.index) != expected {
            violations.push(Violation::ChapterIndex { position: expected, found: chapter.index });
        }
        let k = chapter.index;
        if chapter.setting.trim().is_empty() {
            violations.push(Violation::EmptySetting { chapter: k });
        }
        if chapter.plot.trim().is_empty() {
            violations.push(Violation::EmptyPlot { chapter: k });
        }
        let mut seen = BTreeSet::new();
        for branch in &chapter.branches {
            if branch.branch_id.as_str().trim().is_empty() {
                violations.push(Violation::EmptyBranchId { chapter: k });
            } else if !seen.insert(branch.branch_id.clone()) {
                violations.push(Violation::DuplicateBranchId {
                    chapter: k,
                    branch_id: branch.branch_id.clone(),
                });
            }
            if branch.setting.trim().is_empty() {
                violations.push(Violation::BranchEmptySetting {
                    chapter: k,
                    branch_id: branch.branch_id.clone(),
                });
            }
            if branch.plot.trim().is_empty() {
                violations.push(Violation::BranchEmptyPlot {
                    chapter: k,
                    branch_id: branch.branch_id.clone(),
                });
            }
        }
    }
    ValidationResult { violations }
}

/// Validates `next` as a successor of `previous`: structural rules plus the
/// rule that a deployed version may not change in place.
pub fn validate_revision(previous: &StoryOutline, next: &StoryOutline) -> ValidationResult {
    let mut result = validate_outline(next);
    if previous.is_deployed() && next.version <= previous.version && next != previous {
        result.violations.push(Violation::EditAfterDeploy { version: previous.version });
    }
    result
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixture(chapters: usize) -> StoryOutline {
        StoryOutline {
            outline_id: "out_1".into(),
            title: "Exam Heartbeat Battle".into(),
            brief: "final-exam anxiety; rabbit protagonist".into(),
            child_profile_note: "Anxiety-prone".into(),
            chapters: (1..=chapters as u8)
                .map(|k| ChapterSpec::linear(k, format!("setting {k}"), format!("plot {k}")))
                .collect(),
            status: OutlineStatus::Draft,
            version: 1,
            created_at: Timestamp::from_millis(0),
            updated_at: Timestamp::from_millis(0),
        }
    }

    #[test]
    fn minimal_outline_is_valid() {
        assert!(validate_outline(&fixture(4)).is_ok());
    }

    #[test]
    fn three_chapters_is_a_count_violation() {
        let result = validate_outline(&fixture(3));
        assert_eq!(result.violations, vec![Violation::ChapterCount { found: 3 }]);
        assert!(result.to_string().contains("chapter count ≠ 4"));
    }

    #[test]
    fn branch_missing_plot_is_named() {
        let mut outline = fixture(4);
        outline.chapters[2].branches = vec![
            BranchSpec {
                branch_id: "up".into(),
                valence: Valence::Positive,
                setting: "s".into(),
                plot: "p".into(),
            },
            BranchSpec {
                branch_id: "down".into(),
                valence: Valence::Negative,
                setting: "s".into(),
                plot: "  ".into(),
            },
        ];
        let result = validate_outline(&outline);
        assert_eq!(
            result.violations,
            vec![Violation::BranchEmptyPlot { chapter: 3, branch_id: "down".into() }]
        );
        assert!(result.to_string().contains("down"));
    }

    #[test]
    fn duplicate_branch_ids_rejected() {
        let mut outline = fixture(4);
        let branch = BranchSpec {
            branch_id: "b1".into(),
            valence: Valence::Neutral,
            setting: "s".into(),
            plot: "p".into(),
        };
        outline.chapters[0].branches = vec![branch.clone(), branch];
        assert_eq!(
            validate_outline(&outline).violations,
            vec![Violation::DuplicateBranchId { chapter: 1, branch_id: "b1".into() }]
        );
    }

    #[test]
    fn editing_deployed_outline_yields_new_draft() {
        let deployed = fixture(4).deployed();
        let before = deployed.to_document().unwrap();
        let next = deployed.edited(Timestamp::from_millis(5), |o| o.chapters[0].plot = "new".into());
        assert_eq!(deployed.to_document().unwrap(), before);
        assert_eq!(next.status, OutlineStatus::Draft);
        assert_eq!(next.version, 2);
        assert!(validate_revision(&deployed, &next).is_ok());

        let mut in_place = deployed.clone();
        in_place.chapters[0].plot = "sneaky".into();
        assert_eq!(
            validate_revision(&deployed, &in_place).violations,
            vec![Violation::EditAfterDeploy { version: 1 }]
        );
    }
}
