use super::outline_text::{self, OutlineText};
use super::{slots, tasks, AgentError, Agents};
use crate::domain::{
    AgentTrace, ChapterSpec, OutlineId, OutlineStatus, StoryOutline, Timestamp, CHAPTER_COUNT,
};
use crate::provider::AgentRole;

fn four_chapters(raw: &str) -> Result<OutlineText, String> {
    let parsed = outline_text::parse(raw)?;
    if parsed.chapters.len() != CHAPTER_COUNT {
        return Err(format!("expected {CHAPTER_COUNT} chapters, found {}", parsed.chapters.len()));
    }
    Ok(parsed)
}

fn chapter_pairs(outline: &StoryOutline) -> Vec<(String, String)> {
    outline.chapters.iter().map(|c| (c.setting.clone(), c.plot.clone())).collect()
}

impl Agents {
    /// Extends a teacher's brief into a draft four-chapter outline.
    pub fn outline(
        &self,
        outline_id: OutlineId,
        brief: &str,
        child_note: &str,
        at: Timestamp,
    ) -> Result<(StoryOutline, AgentTrace), AgentError> {
        if brief.trim().is_empty() {
            return Err(AgentError::Precondition {
                agent: AgentRole::Outline,
                reason: "brief is empty".into(),
            });
        }
        let bindings = vec![
            (slots::BRIEF, brief.trim().to_string()),
            (slots::CHILD_NOTE, child_note.trim().to_string()),
        ];
        let (parsed, trace) = self.call_text(tasks::OUTLINE, bindings, 1, four_chapters)?;
        let outline = StoryOutline {
            outline_id,
            title: parsed.title,
            brief: brief.trim().to_string(),
            child_profile_note: child_note.trim().to_string(),
            chapters: parsed
                .chapters
                .into_iter()
                .zip(1u8..)
                .map(|((setting, plot), k)| ChapterSpec::linear(k, setting, plot))
                .collect(),
            status: OutlineStatus::Draft,
            version: 1,
            created_at: at,
            updated_at: at,
        };
        Ok((outline, trace))
    }

    /// Rewrites chapter `k` following `instruction`; returns the next draft
    /// version. Other chapters and all branches are kept as they were.
    pub fn rewrite_chapter(
        &self,
        outline: &StoryOutline,
        k: u8,
        instruction: &str,
        at: Timestamp,
    ) -> Result<(StoryOutline, AgentTrace), AgentError> {
        let precondition =
            |reason: String| AgentError::Precondition { agent: AgentRole::Outline, reason };
        if outline.chapter(k).is_none() {
            return Err(precondition(format!("no chapter {k}")));
        }
        if instruction.trim().is_empty() {
            return Err(precondition("instruction is empty".into()));
        }
        let bindings = vec![
            (slots::CURRENT_OUTLINE, outline_text::render(&outline.title, &chapter_pairs(outline))),
            (slots::REWRITE_CHAPTER, k.to_string()),
            (slots::INSTRUCTION, instruction.trim().to_string()),
            (slots::CHILD_NOTE, outline.child_profile_note.clone()),
        ];
        let (parsed, trace) = self.call_text(tasks::OUTLINE_REWRITE, bindings, 1, four_chapters)?;
        let (setting, plot) = parsed.chapters[usize::from(k) - 1].clone();
        let next = outline.edited(at, |o| {
            let chapter = &mut o.chapters[usize::from(k) - 1];
            chapter.setting = setting;
            chapter.plot = plot;
        });
        Ok((next, trace))
    }
}
