use super::{slots, tasks, AgentError, Agents};
use crate::assets::AssetRef;
use crate::domain::{
    AgentTrace, BranchId, CharacterProfile, GeneratedChapter, StoryOutline, CHAPTER_COUNT,
    PARAGRAPHS_PER_CHAPTER,
};
use crate::provider::{AgentRole, ImageRequest, Layout};

pub(crate) fn story_so_far(chapters: &[GeneratedChapter]) -> String {
    if chapters.is_empty() {
        return "(the story has not started yet)".into();
    }
    chapters
        .iter()
        .map(|c| format!("Chapter {}:\n{}", c.index, c.paragraphs.join("\n")))
        .collect::<Vec<_>>()
        .join("\n\n")
}

fn split_paragraphs(raw: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut current = Vec::new();
    for line in raw.lines() {
        if line.trim().is_empty() {
            if !current.is_empty() {
                out.push(current.join(" "));
                current.clear();
            }
        } else {
            current.push(line.trim());
        }
    }
    if !current.is_empty() {
        out.push(current.join(" "));
    }
    out
}

fn sentences(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut current = String::new();
    for c in text.chars() {
        current.push(c);
        if matches!(c, '.' | '!' | '?' | '。' | '！' | '？') {
            if !current.trim().is_empty() {
                out.push(current.trim().to_string());
            }
            current.clear();
        }
    }
    if !current.trim().is_empty() {
        out.push(current.trim().to_string());
    }
    out
}

/// Groups `units` into `n` non-empty runs of nearly equal length.
fn regroup(units: &[String], n: usize, sep: &str) -> Vec<String> {
    (0..n)
        .map(|i| units[i * units.len() / n..(i + 1) * units.len() / n].join(sep))
        .collect()
}

/// Forces `paragraphs` into exactly four: extras are merged into the last
/// one, too few are re-split on sentence (then word) boundaries.
pub(crate) fn repair_paragraphs(paragraphs: &[String]) -> Option<Vec<String>> {
    let n = PARAGRAPHS_PER_CHAPTER;
    if paragraphs.len() > n {
        let mut out = paragraphs[..n - 1].to_vec();
        out.push(paragraphs[n - 1..].join(" "));
        return Some(out);
    }
    let text = paragraphs.join(" ");
    let units = sentences(&text);
    if units.len() >= n {
        return Some(regroup(&units, n, " "));
    }
    let words: Vec<String> = text.split_whitespace().map(str::to_string).collect();
    (words.len() >= n).then(|| regroup(&words, n, " "))
}

impl Agents {
    fn require_chapters(
        agent: AgentRole,
        chapters: &[GeneratedChapter],
        k: u8,
    ) -> Result<(), AgentError> {
        if !(1..=CHAPTER_COUNT as u8).contains(&k) {
            return Err(AgentError::Precondition { agent, reason: format!("chapter {k} out of 1..4") });
        }
        if chapters.len() != usize::from(k) - 1 {
            return Err(AgentError::Precondition {
                agent,
                reason: format!("chapter {k} needs {} prior chapter(s), found {}", k - 1, chapters.len()),
            });
        }
        Ok(())
    }

    /// Profile text plus a polished illustration for a child's drawing.
    pub fn character(
        &self,
        drawing: &AssetRef,
        name: &str,
        previous: Option<&CharacterProfile>,
    ) -> Result<(CharacterProfile, Vec<AgentTrace>), AgentError> {
        let agent = AgentRole::Character;
        let name = name.trim();
        if name.is_empty() {
            return Err(AgentError::Precondition { agent, reason: "name is empty".into() });
        }
        self.gateway.assets.resolve(drawing).map_err(|e| AgentError::asset(agent, e))?;
        let bindings =
            vec![(slots::PROTAGONIST, name.to_string()), (slots::DRAWING, drawing.to_string())];
        let (description, text_trace) = self.call_text(tasks::CHARACTER, bindings, 1, |raw| {
            let text = raw.trim();
            if text.is_empty() {
                Err("empty description".into())
            } else {
                Ok(text.to_string())
            }
        })?;
        let prompt = format!("Storybook-style illustration of {name}. {description}");
        let req = ImageRequest {
            prompt: prompt.clone(),
            reference_images: vec![drawing.clone()],
            layout: Layout::Single,
        };
        let image = self
            .gateway
            .generate_image(&req)
            .map_err(|source| AgentError::Provider { agent, source })?;
        let image_trace = AgentTrace {
            agent: agent.to_string(),
            rendered_prompt: prompt,
            context_labels: Vec::new(),
            reference_images: vec![drawing.clone()],
            raw_output: image.image.to_string(),
            validated_output: image.image.to_string(),
            attempts: 1,
            warnings: Vec::new(),
        };
        let profile = CharacterProfile {
            name: name.to_string(),
            description,
            source_drawing: drawing.clone(),
            illustration: image.image,
            generation_attempt: previous.map_or(1, |p| p.generation_attempt + 1),
        };
        Ok((profile, vec![text_trace, image_trace]))
    }

    /// Situation narration plus a prompting question about the protagonist.
    pub fn question(
        &self,
        outline: &StoryOutline,
        profile: &CharacterProfile,
        chapters: &[GeneratedChapter],
        k: u8,
    ) -> Result<(String, AgentTrace), AgentError> {
        Self::require_chapters(AgentRole::Question, chapters, k)?;
        let chapter = outline.chapter(k).ok_or_else(|| AgentError::Precondition {
            agent: AgentRole::Question,
            reason: format!("outline has no chapter {k}"),
        })?;
        let bindings = vec![
            (slots::PROTAGONIST, profile.name.clone()),
            (slots::CHARACTER_PROFILE, profile.description.clone()),
            (slots::OUTLINE_TITLE, outline.title.clone()),
            (slots::CHAPTER_INDEX, k.to_string()),
            (slots::CHAPTER_SETTING, chapter.setting.clone()),
            (slots::CHAPTER_PLOT, chapter.plot.clone()),
            (slots::STORY_SO_FAR, story_so_far(chapters)),
        ];
        let name = profile.name.as_str();
        self.call_text(tasks::QUESTION, bindings, 1, |raw| {
            let text = raw.trim();
            let ends = text.trim_end_matches(['"', '\'', '”', ')']).ends_with(['?', '？']);
            if !ends {
                Err("no closing question mark".into())
            } else if !text.contains(name) {
                Err(format!("protagonist {name:?} not named"))
            } else {
                Ok(text.to_string())
            }
        })
    }

    /// Four paragraphs for chapter `k`, following `branch` when given.
    #[allow(clippy::too_many_arguments)]
    pub fn write(
        &self,
        outline: &StoryOutline,
        profile: &CharacterProfile,
        chapters: &[GeneratedChapter],
        k: u8,
        response: &str,
        branch: Option<&BranchId>,
    ) -> Result<(Vec<String>, AgentTrace), AgentError> {
        let agent = AgentRole::Writing;
        Self::require_chapters(agent, chapters, k)?;
        if response.trim().is_empty() {
            return Err(AgentError::Precondition { agent, reason: format!("no response for milestone {k}") });
        }
        let chapter = outline.chapter(k).ok_or_else(|| AgentError::Precondition {
            agent,
            reason: format!("outline has no chapter {k}"),
        })?;
        let (setting, plot) = match branch {
            Some(id) => {
                let b = chapter.branch(id).ok_or_else(|| AgentError::Precondition {
                    agent,
                    reason: format!("chapter {k} has no branch {id}"),
                })?;
                (b.setting.clone(), b.plot.clone())
            }
            None => (chapter.setting.clone(), chapter.plot.clone()),
        };
        let bindings = vec![
            (slots::PROTAGONIST, profile.name.clone()),
            (slots::CHARACTER_PROFILE, profile.description.clone()),
            (slots::OUTLINE_TITLE, outline.title.clone()),
            (slots::CHAPTER_INDEX, k.to_string()),
            (slots::CHAPTER_SETTING, setting),
            (slots::CHAPTER_PLOT, plot),
            (slots::STORY_SO_FAR, story_so_far(chapters)),
            (slots::CHILD_RESPONSE, response.trim().to_string()),
        ];
        let (req, mut trace) = self.request(tasks::WRITING, bindings)?;
        let mut last = Vec::new();
        for _ in 0..2 {
            let raw = self.generate(&req, &mut trace)?;
            last = split_paragraphs(&raw);
            if last.len() == PARAGRAPHS_PER_CHAPTER {
                trace.validated_output = last.join("\n\n");
                return Ok((last, trace));
            }
            trace.warnings.push(format!(
                "attempt {}: expected {PARAGRAPHS_PER_CHAPTER} paragraphs, found {}",
                trace.attempts,
                last.len()
            ));
        }
        match repair_paragraphs(&last) {
            Some(fixed) if !last.is_empty() => {
                trace.warnings.push(format!("repaired {} paragraph(s) into 4", last.len()));
                trace.validated_output = fixed.join("\n\n");
                Ok((fixed, trace))
            }
            _ => Err(AgentError::Malformed {
                agent,
                raw: trace.raw_output.clone(),
                reason: "no usable paragraphs".into(),
            }),
        }
    }

    /// One four-panel image for a chapter, using the illustration as reference.
    pub fn draw(
        &self,
        profile: &CharacterProfile,
        k: u8,
        paragraphs: &[String],
    ) -> Result<(AssetRef, AgentTrace), AgentError> {
        let agent = AgentRole::Drawing;
        if paragraphs.len() != PARAGRAPHS_PER_CHAPTER || paragraphs.iter().any(|p| p.trim().is_empty()) {
            return Err(AgentError::Precondition { agent, reason: "chapter needs 4 non-empty paragraphs".into() });
        }
        self.gateway.assets.resolve(&profile.illustration).map_err(|e| AgentError::asset(agent, e))?;
        let bindings = vec![
            (slots::PROTAGONIST, profile.name.clone()),
            (slots::CHARACTER_PROFILE, profile.description.clone()),
            (slots::CHAPTER_INDEX, k.to_string()),
            (slots::CHAPTER_TEXT, paragraphs.join("\n")),
        ];
        let (_, prompt) = self.render(tasks::DRAWING, &bindings)?;
        let req = ImageRequest {
            prompt: prompt.clone(),
            reference_images: vec![profile.illustration.clone()],
            layout: Layout::FourPanel,
        };
        let image = self
            .gateway
            .generate_image(&req)
            .map_err(|source| AgentError::Provider { agent, source })?;
        if image.layout != Layout::FourPanel {
            return Err(AgentError::LayoutMismatch { expected: Layout::FourPanel, found: image.layout });
        }
        let mut context_labels: Vec<String> = bindings.iter().map(|(l, _)| l.to_string()).collect();
        context_labels.sort();
        let trace = AgentTrace {
            agent: agent.to_string(),
            rendered_prompt: prompt,
            context_labels,
            reference_images: req.reference_images,
            raw_output: image.image.to_string(),
            validated_output: image.image.to_string(),
            attempts: 1,
            warnings: Vec::new(),
        };
        Ok((image.image, trace))
    }
}
