use super::story::story_so_far;
use super::{slots, tasks, AgentError, Agents};
use crate::domain::{AgentTrace, AnalysisReport, CopingSubscale, Session, CHAPTER_COUNT};
use crate::provider::AgentRole;

fn parse_report(raw: &str, expected: usize) -> Result<AnalysisReport, String> {
    let mut comments: Vec<Option<String>> = vec![None; expected];
    let mut analysis = None;
    let mut advice = None;
    for line in raw.lines().map(str::trim).filter(|l| !l.is_empty()) {
        if let Some(rest) = line.strip_prefix("COMMENT") {
            let (n, text) = rest.split_once(':').ok_or(format!("bad comment line {line:?}"))?;
            let n: usize = n.trim().parse().map_err(|_| format!("bad comment number in {line:?}"))?;
            let slot = comments
                .get_mut(n.wrapping_sub(1))
                .ok_or(format!("comment {n} outside 1..{expected}"))?;
            *slot = Some(text.trim().to_string());
        } else if let Some(rest) = line.strip_prefix("ANALYSIS:") {
            analysis = Some(rest.trim().to_string());
        } else if let Some(rest) = line.strip_prefix("ADVICE:") {
            advice = Some(rest.trim().to_string());
        }
    }
    let per_response_comments = comments
        .into_iter()
        .enumerate()
        .map(|(i, c)| c.filter(|c| !c.is_empty()).ok_or(format!("missing comment {}", i + 1)))
        .collect::<Result<Vec<_>, _>>()?;
    let overall_analysis = analysis.filter(|a| !a.is_empty()).ok_or("missing ANALYSIS section")?;
    let parent_advice = advice.filter(|a| !a.is_empty()).ok_or("missing ADVICE section")?;
    Ok(AnalysisReport { per_response_comments, overall_analysis, parent_advice })
}

fn full_story(session: &Session) -> String {
    story_so_far(&session.chapters)
}

/// Result of a suggested coping classification.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CopingSuggestion {
    /// `None` when the classifier never produced one of the 13 names.
    pub subscale: Option<CopingSubscale>,
    pub trace: AgentTrace,
}

impl CopingSuggestion {
    pub fn unresolved(&self) -> bool {
        self.subscale.is_none()
    }
}

impl Agents {
    /// Story summary with a closing compliment.
    pub fn reflect(&self, session: &Session) -> Result<(String, AgentTrace), AgentError> {
        let agent = AgentRole::Reflection;
        let name = session.protagonist().ok_or_else(|| AgentError::Precondition {
            agent,
            reason: "no character".into(),
        })?;
        if session.chapters.len() != CHAPTER_COUNT {
            return Err(AgentError::Precondition {
                agent,
                reason: format!("{} of {CHAPTER_COUNT} chapters generated", session.chapters.len()),
            });
        }
        let bindings = vec![
            (slots::PROTAGONIST, name.to_string()),
            (slots::OUTLINE_TITLE, session.outline.title.clone()),
            (slots::STORY_TEXT, full_story(session)),
        ];
        self.call_text(tasks::REFLECTION, bindings, 1, |raw| {
            let text = raw.trim();
            if text.is_empty() {
                Err("empty reflection".into())
            } else {
                Ok(text.to_string())
            }
        })
    }

    /// Per-response comments, overall analysis and parent advice.
    pub fn analyse(&self, session: &Session) -> Result<(AnalysisReport, AgentTrace), AgentError> {
        let agent = AgentRole::Analysis;
        let name = session.protagonist().ok_or_else(|| AgentError::Precondition {
            agent,
            reason: "no character".into(),
        })?;
        let answered: Vec<_> = session.milestones.iter().filter(|m| m.has_response()).collect();
        if answered.len() != CHAPTER_COUNT {
            return Err(AgentError::Precondition {
                agent,
                reason: format!("{} of {CHAPTER_COUNT} responses recorded", answered.len()),
            });
        }
        let dialogue = answered
            .iter()
            .map(|m| {
                let flat = |s: &str| s.split_whitespace().collect::<Vec<_>>().join(" ");
                format!(
                    "Q{k}: {}\nA{k}: {}",
                    flat(&m.question_text),
                    flat(m.response_text.as_deref().unwrap_or_default()),
                    k = m.index
                )
            })
            .collect::<Vec<_>>()
            .join("\n");
        let bindings = vec![
            (slots::PROTAGONIST, name.to_string()),
            (slots::CHILD_NOTE, session.outline.child_profile_note.clone()),
            (slots::DIALOGUE, dialogue),
            (slots::STORY_TEXT, full_story(session)),
        ];
        self.call_text(tasks::ANALYSIS, bindings, 1, |raw| parse_report(raw, CHAPTER_COUNT))
    }

    /// Asks the text provider for one of the 13 subscale names; one retry.
    pub fn suggest_coping(&self, response_text: &str) -> Result<CopingSuggestion, AgentError> {
        let names =
            CopingSubscale::ALL.iter().map(|s| s.name()).collect::<Vec<_>>().join(", ");
        let bindings = vec![
            (slots::RESPONSE_TEXT, response_text.trim().to_string()),
            (slots::SUBSCALE_NAMES, names),
        ];
        let parse = |raw: &str| {
            raw.trim()
                .trim_end_matches('.')
                .parse::<CopingSubscale>()
                .map_err(|e| e.to_string())
        };
        match self.call_text(tasks::COPING_SUBSCALE, bindings.clone(), 1, parse) {
            Ok((subscale, trace)) => Ok(CopingSuggestion { subscale: Some(subscale), trace }),
            Err(AgentError::Malformed { raw, reason, .. }) => {
                let (_, mut trace) = self.request(tasks::COPING_SUBSCALE, bindings)?;
                trace.attempts = 2;
                trace.raw_output = raw;
                trace.warnings.push(format!("unresolved: {reason}"));
                Ok(CopingSuggestion { subscale: None, trace })
            }
            Err(other) => Err(other),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_sections_parse() {
        let raw = "COMMENT 1: a\nCOMMENT 2: b\nCOMMENT 3: c\nCOMMENT 4: d\nANALYSIS: x\nADVICE: y\n";
        let report = parse_report(raw, 4).unwrap();
        assert_eq!(report.per_response_comments, vec!["a", "b", "c", "d"]);
        assert_eq!(report.parent_advice, "y");
    }

    #[test]
    fn missing_advice_is_reported() {
        let raw = "COMMENT 1: a\nCOMMENT 2: b\nCOMMENT 3: c\nCOMMENT 4: d\nANALYSIS: x\n";
        assert_eq!(parse_report(raw, 4).unwrap_err(), "missing ADVICE section");
        assert!(parse_report("COMMENT 5: z", 4).is_err());
    }
}
