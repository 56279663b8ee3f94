//! The seven generation agents plus branch selection.
//!
//! Each agent renders a prompt template, calls one provider capability and
//! validates the output structurally. Every call is recorded as an
//! [`AgentTrace`].

mod authoring;
mod branch;
mod closing;
pub mod outline_text;
mod story;
mod template;

use crate::assets::AssetError;
use crate::domain::AgentTrace;
use crate::provider::{AgentRole, Gateway, Layout, ProviderError, TextRequest};

pub use branch::{keyword_valence, BranchChoice};
pub use closing::CopingSuggestion;
pub use template::{PromptTemplate, TemplateError, TemplateSet, TEMPLATE_DOCUMENT};

/// Stand-in response recorded when the child stays silent through every re-ask.
pub const PLACEHOLDER_RESPONSE: &str = "…";

/// Context labels, which are also the template slot names.
pub mod slots {
    pub const TASK: &str = "task";
    pub const BRIEF: &str = "brief";
    pub const CHILD_NOTE: &str = "child_note";
    pub const CURRENT_OUTLINE: &str = "current_outline";
    pub const REWRITE_CHAPTER: &str = "rewrite_chapter";
    pub const INSTRUCTION: &str = "instruction";
    pub const PROTAGONIST: &str = "protagonist";
    pub const DRAWING: &str = "drawing";
    pub const CHARACTER_PROFILE: &str = "character_profile";
    pub const OUTLINE_TITLE: &str = "outline_title";
    pub const CHAPTER_INDEX: &str = "chapter_index";
    pub const CHAPTER_SETTING: &str = "chapter_setting";
    pub const CHAPTER_PLOT: &str = "chapter_plot";
    pub const STORY_SO_FAR: &str = "story_so_far";
    pub const CHILD_RESPONSE: &str = "child_response";
    pub const CHAPTER_TEXT: &str = "chapter_text";
    pub const STORY_TEXT: &str = "story_text";
    pub const DIALOGUE: &str = "dialogue";
    pub const QUESTION: &str = "question";
    pub const BRANCH_OPTIONS: &str = "branch_options";
    pub const RESPONSE_TEXT: &str = "response_text";
    pub const SUBSCALE_NAMES: &str = "subscale_names";
}

/// Template names.
pub mod tasks {
    pub const OUTLINE: &str = "outline";
    pub const OUTLINE_REWRITE: &str = "outline_rewrite";
    pub const CHARACTER: &str = "character";
    pub const QUESTION: &str = "question";
    pub const WRITING: &str = "writing";
    pub const DRAWING: &str = "drawing";
    pub const REFLECTION: &str = "reflection";
    pub const ANALYSIS: &str = "analysis";
    pub const BRANCH_VALENCE: &str = "branch_valence";
    pub const COPING_SUBSCALE: &str = "coping_subscale";
}

#[derive(Debug, thiserror::Error)]
pub enum AgentError {
    #[error("{agent} agent: {source}")]
    Provider { agent: AgentRole, source: ProviderError },
    #[error("{agent} agent: malformed output ({reason}): {raw:?}")]
    Malformed { agent: AgentRole, raw: String, reason: String },
    #[error(transparent)]
    Template(#[from] TemplateError),
    #[error("{agent} agent: precondition failed: {reason}")]
    Precondition { agent: AgentRole, reason: String },
    #[error("drawing agent: expected a {expected:?} image, provider returned {found:?}")]
    LayoutMismatch { expected: Layout, found: Layout },
}

impl AgentError {
    pub fn agent(&self) -> Option<AgentRole> {
        match self {
            AgentError::Provider { agent, .. }
            | AgentError::Malformed { agent, .. }
            | AgentError::Precondition { agent, .. } => Some(*agent),
            AgentError::LayoutMismatch { .. } => Some(AgentRole::Drawing),
            AgentError::Template(_) => None,
        }
    }

    fn asset(agent: AgentRole, e: AssetError) -> Self {
        AgentError::Precondition { agent, reason: e.to_string() }
    }
}

/// Replaces "the protagonist" (any capitalisation of the first letter) with `name`.
pub fn personalize(text: &str, name: &str) -> String {
    text.replace("The protagonist", name)
        .replace("the protagonist", name)
        .replace("Protagonist", name)
        .replace("protagonist", name)
}

/// The agent pipeline bound to one provider gateway and template set.
#[derive(Debug, Clone)]
pub struct Agents {
    gateway: Gateway,
    templates: TemplateSet,
}

impl Agents {
    pub fn new(gateway: Gateway, templates: TemplateSet) -> Self {
        Self { gateway, templates }
    }

    pub fn gateway(&self) -> &Gateway {
        &self.gateway
    }

    pub fn templates(&self) -> &TemplateSet {
        &self.templates
    }

    fn render(
        &self,
        task: &str,
        bindings: &[(&str, String)],
    ) -> Result<(AgentRole, String), AgentError> {
        let template = self.templates.get(task)?;
        Ok((template.agent, template.render(bindings)?))
    }

    fn request(
        &self,
        task: &str,
        bindings: Vec<(&str, String)>,
    ) -> Result<(TextRequest, AgentTrace), AgentError> {
        let (agent, prompt) = self.render(task, &bindings)?;
        let mut req = TextRequest::new(agent, prompt.clone()).with(slots::TASK, task);
        for (label, value) in bindings {
            req = req.with(label, value);
        }
        let mut context_labels: Vec<String> = req.context.iter().map(|c| c.label.clone()).collect();
        context_labels.sort();
        let trace = AgentTrace {
            agent: agent.to_string(),
            rendered_prompt: prompt,
            context_labels,
            reference_images: Vec::new(),
            raw_output: String::new(),
            validated_output: String::new(),
            attempts: 0,
            warnings: Vec::new(),
        };
        Ok((req, trace))
    }

    fn generate(&self, req: &TextRequest, trace: &mut AgentTrace) -> Result<String, AgentError> {
        trace.attempts += 1;
        let out = self
            .gateway
            .generate_text(req)
            .map_err(|source| AgentError::Provider { agent: req.role, source })?;
        trace.raw_output = out.text.clone();
        Ok(out.text)
    }

    /// Renders `task`, calls the text provider and validates, retrying up to
    /// `retries` more times on malformed output.
    fn call_text<T>(
        &self,
        task: &str,
        bindings: Vec<(&str, String)>,
        retries: u32,
        validate: impl Fn(&str) -> Result<T, String>,
    ) -> Result<(T, AgentTrace), AgentError> {
        let (req, mut trace) = self.request(task, bindings)?;
        loop {
            let raw = self.generate(&req, &mut trace)?;
            match validate(&raw) {
                Ok(value) => {
                    trace.validated_output = raw.trim().to_string();
                    return Ok((value, trace));
                }
                Err(reason) if trace.attempts > retries => {
                    return Err(AgentError::Malformed { agent: req.role, raw, reason });
                }
                Err(reason) => trace.warnings.push(format!("attempt {}: {reason}", trace.attempts)),
            }
        }
    }
}
