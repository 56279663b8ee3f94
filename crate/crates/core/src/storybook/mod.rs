//! Compiles a finished session into the child's print storybook and the
//! parent's annotated storybook, and renders either to a file.

mod render;

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::assets::AssetRef;
use crate::canon::{self, CanonError};
use crate::domain::{Session, SessionId, SessionState, CHAPTER_COUNT};

pub use render::{render, render_html, render_plain_text};

pub const STORYBOOK_DOCUMENT: &str = "storybook";
pub const ANNOTATED_DOCUMENT: &str = "annotated_storybook";
pub const EXPORT_DIR: &str = "exports";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Print,
    Annotated,
}

impl Variant {
    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Print => "print",
            Variant::Annotated => "annotated",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Variant {
    type Err = StorybookError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "print" => Ok(Variant::Print),
            "annotated" => Ok(Variant::Annotated),
            other => Err(StorybookError::UnknownVariant(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExportFormat {
    Interchange,
    PaginatedHtml,
    PlainText,
}

impl ExportFormat {
    pub const ALL: [ExportFormat; 3] =
        [ExportFormat::Interchange, ExportFormat::PaginatedHtml, ExportFormat::PlainText];

    pub fn as_str(self) -> &'static str {
        match self {
            ExportFormat::Interchange => "interchange",
            ExportFormat::PaginatedHtml => "paginated_html",
            ExportFormat::PlainText => "plain_text",
        }
    }

    pub fn extension(self) -> &'static str {
        match self {
            ExportFormat::Interchange => "json",
            ExportFormat::PaginatedHtml => "html",
            ExportFormat::PlainText => "txt",
        }
    }
}

impl fmt::Display for ExportFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExportFormat {
    type Err = StorybookError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ExportFormat::ALL
            .into_iter()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| StorybookError::UnknownFormat(s.to_string()))
    }
}

#[derive(Debug, thiserror::Error)]
pub enum StorybookError {
    #[error("session is {state}, not complete")]
    Incomplete { state: SessionState },
    #[error("session has no analysis report")]
    MissingAnalysis,
    #[error("unknown export format {0:?} (expected interchange, paginated_html or plain_text)")]
    UnknownFormat(String),
    #[error("unknown storybook variant {0:?} (expected print or annotated)")]
    UnknownVariant(String),
    #[error("export I/O: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Encode(#[from] CanonError),
}

/// Page metrics for print. Defaults favour young readers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayoutMeta {
    pub page_size: String,
    pub font_size_class: String,
}

impl Default for LayoutMeta {
    fn default() -> Self {
        Self { page_size: "A5".into(), font_size_class: "large".into() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CharacterPage {
    pub name: String,
    pub illustration: AssetRef,
    pub description: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChapterPage {
    pub index: u8,
    pub panel_image: AssetRef,
    pub paragraphs: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Storybook {
    pub session_id: SessionId,
    pub title: String,
    pub character_page: CharacterPage,
    pub chapter_pages: Vec<ChapterPage>,
    pub closing_page: String,
    pub variant: Variant,
    pub layout_meta: LayoutMeta,
}

impl Storybook {
    /// Title, character, four chapters and the closing page.
    pub fn page_count(&self) -> usize {
        3 + self.chapter_pages.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MilestoneBlock {
    pub index: u8,
    pub question: String,
    pub response: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub teacher_comment: Option<String>,
    pub ai_comment: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotatedStorybook {
    pub book: Storybook,
    pub milestone_blocks: Vec<MilestoneBlock>,
    pub ai_analysis: String,
    pub parent_advice: String,
}

/// Either compiled variant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Book {
    Print(Storybook),
    Annotated(AnnotatedStorybook),
}

impl Book {
    pub fn variant(&self) -> Variant {
        match self {
            Book::Print(_) => Variant::Print,
            Book::Annotated(_) => Variant::Annotated,
        }
    }

    pub fn storybook(&self) -> &Storybook {
        match self {
            Book::Print(b) => b,
            Book::Annotated(a) => &a.book,
        }
    }

    pub fn to_interchange(&self) -> Result<String, CanonError> {
        match self {
            Book::Print(b) => canon::to_document(STORYBOOK_DOCUMENT, b),
            Book::Annotated(a) => canon::to_document(ANNOTATED_DOCUMENT, a),
        }
    }

    /// Decodes either document kind.
    pub fn from_interchange(text: &str) -> Result<Book, CanonError> {
        match canon::from_document(STORYBOOK_DOCUMENT, text) {
            Ok(b) => Ok(Book::Print(b)),
            Err(CanonError::Kind { found: Some(kind), .. }) if kind == ANNOTATED_DOCUMENT => {
                canon::from_document(ANNOTATED_DOCUMENT, text).map(Book::Annotated)
            }
            Err(e) => Err(e),
        }
    }
}

fn storybook(session: &Session, variant: Variant) -> Result<Storybook, StorybookError> {
    let incomplete = || StorybookError::Incomplete { state: session.state };
    if session.state != SessionState::Complete || session.chapters.len() != CHAPTER_COUNT {
        return Err(incomplete());
    }
    let character = session.character.as_ref().ok_or_else(incomplete)?;
    let closing_page = session.reflection.clone().ok_or_else(incomplete)?;
    Ok(Storybook {
        session_id: session.session_id.clone(),
        title: session.outline.title.clone(),
        character_page: CharacterPage {
            name: character.name.clone(),
            illustration: character.illustration.clone(),
            description: character.description.clone(),
        },
        chapter_pages: session
            .chapters
            .iter()
            .map(|c| ChapterPage {
                index: c.index,
                panel_image: c.panel_image.clone(),
                paragraphs: c.paragraphs.clone(),
            })
            .collect(),
        closing_page,
        variant,
        layout_meta: LayoutMeta::default(),
    })
}

/// The child's storybook: story pages only.
pub fn compile_print(session: &Session) -> Result<Storybook, StorybookError> {
    storybook(session, Variant::Print)
}

/// The parent's storybook with one block per milestone.
pub fn compile_annotated(session: &Session) -> Result<AnnotatedStorybook, StorybookError> {
    let book = storybook(session, Variant::Annotated)?;
    let report = session.analysis.as_ref().ok_or(StorybookError::MissingAnalysis)?;
    let milestone_blocks = session
        .milestones
        .iter()
        .zip(&report.per_response_comments)
        .map(|(m, ai)| MilestoneBlock {
            index: m.index,
            question: m.question_text.clone(),
            response: m.response_text.clone().unwrap_or_default(),
            teacher_comment: session.teacher_comment(m.index).map(str::to_string),
            ai_comment: ai.clone(),
        })
        .collect();
    Ok(AnnotatedStorybook {
        book,
        milestone_blocks,
        ai_analysis: report.overall_analysis.clone(),
        parent_advice: report.parent_advice.clone(),
    })
}

pub fn compile(session: &Session, variant: Variant) -> Result<Book, StorybookError> {
    Ok(match variant {
        Variant::Print => Book::Print(compile_print(session)?),
        Variant::Annotated => Book::Annotated(compile_annotated(session)?),
    })
}

/// `exports/{session_id}/{variant}.{ext}` relative to a data directory.
pub fn export_path(session_id: &SessionId, variant: Variant, format: ExportFormat) -> PathBuf {
    Path::new(EXPORT_DIR)
        .join(session_id.as_str())
        .join(format!("{}.{}", variant.as_str(), format.extension()))
}

/// Renders `book` and writes it below `root`; returns the written path.
pub fn export(book: &Book, format: ExportFormat, root: &Path) -> Result<PathBuf, StorybookError> {
    let path = root.join(export_path(&book.storybook().session_id, book.variant(), format));
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    fs::write(&path, render(book, format)?)?;
    Ok(path)
}
