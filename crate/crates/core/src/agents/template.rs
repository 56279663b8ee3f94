use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::canon::{self, CanonError};
use crate::provider::AgentRole;

pub const TEMPLATE_DOCUMENT: &str = "prompt_template";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptTemplate {
    pub name: String,
    pub agent: AgentRole,
    pub locale: String,
    pub template_text: String,
    pub required_slots: Vec<String>,
}

#[derive(Debug, thiserror::Error)]
pub enum TemplateError {
    #[error("template {template}: slot {slot:?} is not bound")]
    Unbound { template: String, slot: String },
    #[error("template {template}: slots used in text {used:?} differ from declared {declared:?}")]
    Undeclared { template: String, used: Vec<String>, declared: Vec<String> },
    #[error("template {template}: unterminated slot")]
    Unterminated { template: String },
    #[error("no template named {0:?}")]
    Missing(String),
    #[error("template file {path}: {source}")]
    Document { path: String, source: CanonError },
    #[error("template directory: {0}")]
    Io(#[from] std::io::Error),
}

fn scan(text: &str) -> Option<Vec<(usize, usize, &str)>> {
    let mut out = Vec::new();
    let mut at = 0;
    while let Some(open) = text[at..].find("{{") {
        let start = at + open;
        let close = text[start + 2..].find("}}")? + start + 2;
        out.push((start, close + 2, text[start + 2..close].trim()));
        at = close + 2;
    }
    Some(out)
}

impl PromptTemplate {
    /// Slot names appearing in the text, sorted and deduplicated.
    pub fn slots_in_text(&self) -> Result<BTreeSet<String>, TemplateError> {
        let found = scan(&self.template_text)
            .ok_or_else(|| TemplateError::Unterminated { template: self.name.clone() })?;
        Ok(found.into_iter().map(|(_, _, s)| s.to_string()).collect())
    }

    /// Every slot used in the text is declared and every declared slot is used.
    pub fn check(&self) -> Result<(), TemplateError> {
        let used = self.slots_in_text()?;
        let declared: BTreeSet<String> = self.required_slots.iter().cloned().collect();
        if used != declared || declared.len() != self.required_slots.len() {
            return Err(TemplateError::Undeclared {
                template: self.name.clone(),
                used: used.into_iter().collect(),
                declared: self.required_slots.clone(),
            });
        }
        Ok(())
    }

    pub fn render(&self, bindings: &[(&str, String)]) -> Result<String, TemplateError> {
        for slot in &self.required_slots {
            if !bindings.iter().any(|(k, _)| k == slot) {
                return Err(TemplateError::Unbound {
                    template: self.name.clone(),
                    slot: slot.clone(),
                });
            }
        }
        let spans = scan(&self.template_text)
            .ok_or_else(|| TemplateError::Unterminated { template: self.name.clone() })?;
        let mut out = String::with_capacity(self.template_text.len());
        let mut at = 0;
        for (start, end, slot) in spans {
            out.push_str(&self.template_text[at..start]);
            let value = bindings.iter().find(|(k, _)| *k == slot).map(|(_, v)| v.as_str());
            match value {
                Some(v) => out.push_str(v),
                None => {
                    return Err(TemplateError::Unbound {
                        template: self.name.clone(),
                        slot: slot.to_string(),
                    })
                }
            }
            at = end;
        }
        out.push_str(&self.template_text[at..]);
        Ok(out)
    }
}

const BUILTIN_EN: &[&str] = &[
    include_str!("../../templates/en/outline.json"),
    include_str!("../../templates/en/outline_rewrite.json"),
    include_str!("../../templates/en/character.json"),
    include_str!("../../templates/en/question.json"),
    include_str!("../../templates/en/writing.json"),
    include_str!("../../templates/en/drawing.json"),
    include_str!("../../templates/en/reflection.json"),
    include_str!("../../templates/en/analysis.json"),
    include_str!("../../templates/en/branch_valence.json"),
    include_str!("../../templates/en/coping_subscale.json"),
];

/// Templates keyed by name for one locale.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemplateSet {
    locale: String,
    templates: BTreeMap<String, PromptTemplate>,
}

impl TemplateSet {
    /// The English templates shipped with the crate.
    pub fn builtin() -> Self {
        let mut templates = BTreeMap::new();
        for text in BUILTIN_EN {
            let t: PromptTemplate =
                canon::from_document(TEMPLATE_DOCUMENT, text).expect("builtin template parses");
            t.check().expect("builtin template declares its slots");
            templates.insert(t.name.clone(), t);
        }
        Self { locale: "en".into(), templates }
    }

    /// Builtins overridden by every `*.json` template in `dir`.
    pub fn with_overrides(dir: &Path) -> Result<Self, TemplateError> {
        let mut set = Self::builtin();
        let mut paths: Vec<_> = std::fs::read_dir(dir)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect();
        paths.sort();
        for path in paths {
            let text = std::fs::read_to_string(&path)?;
            let t: PromptTemplate = canon::from_document(TEMPLATE_DOCUMENT, &text).map_err(
                |source| TemplateError::Document { path: path.display().to_string(), source },
            )?;
            t.check()?;
            set.locale = t.locale.clone();
            set.templates.insert(t.name.clone(), t);
        }
        Ok(set)
    }

    pub fn locale(&self) -> &str {
        &self.locale
    }

    pub fn get(&self, name: &str) -> Result<&PromptTemplate, TemplateError> {
        self.templates.get(name).ok_or_else(|| TemplateError::Missing(name.to_string()))
    }

    pub fn iter(&self) -> impl Iterator<Item = &PromptTemplate> {
        self.templates.values()
    }
}

impl Default for TemplateSet {
    fn default() -> Self {
        Self::builtin()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn template(text: &str, slots: &[&str]) -> PromptTemplate {
        PromptTemplate {
            name: "t".into(),
            agent: AgentRole::Question,
            locale: "en".into(),
            template_text: text.into(),
            required_slots: slots.iter().map(|s| s.to_string()).collect(),
        }
    }

    #[test]
    fn renders_bound_slots() {
        let t = template("Hi {{ name }}, chapter {{k}}.", &["name", "k"]);
        t.check().unwrap();
        let out = t.render(&[("name", "Bunny".into()), ("k", "1".into())]).unwrap();
        assert_eq!(out, "Hi Bunny, chapter 1.");
    }

    #[test]
    fn unbound_slot_fails() {
        let t = template("Hi {{name}}", &["name"]);
        let err = t.render(&[]).unwrap_err();
        assert!(matches!(err, TemplateError::Unbound { slot, .. } if slot == "name"));
    }

    #[test]
    fn undeclared_slot_is_caught() {
        assert!(template("{{a}} {{b}}", &["a"]).check().is_err());
        assert!(template("{{a}}", &["a", "b"]).check().is_err());
        assert!(template("{{a", &["a"]).check().is_err());
    }

    #[test]
    fn builtins_cover_every_agent() {
        let set = TemplateSet::builtin();
        for role in AgentRole::ALL {
            assert!(set.iter().any(|t| t.agent == role), "{role}");
        }
    }
}
