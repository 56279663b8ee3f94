use super::{slots, tasks, AgentError, Agents};
use crate::domain::{AgentTrace, BranchId, ChapterSpec, Valence};
use crate::provider::AgentRole;

const POSITIVE_STEMS: &[&str] = &[
    "apolog", "try", "tried", "ask", "practi", "breath", "calm", "help", "explain", "share",
    "join", "focus", "continu", "submit", "admit", "honest", "goal", "learn", "improv", "accept",
    "talk", "tell", "told", "sorry", "seek", "communicat", "listen", "finish", "review", "invite",
];

const POSITIVE_PHRASES: &[&[&str]] = &[&["go", "and", "see"]];

const NEGATIVE_STEMS: &[&str] = &[
    "forget", "forgot", "avoid", "hit", "quit", "hide", "ignor", "cry", "shout", "fight", "stop",
    "refuse", "escape",
];

const NEGATIVE_PHRASES: &[&[&str]] = &[&["give", "up"], &["run", "away"]];

const NEGATORS: &[&str] = &["not", "don't", "dont", "never", "no", "won't", "didn't"];

fn words(text: &str) -> Vec<String> {
    text.to_lowercase()
        .split(|c: char| !(c.is_alphanumeric() || c == '\''))
        .filter(|w| !w.is_empty())
        .map(str::to_string)
        .collect()
}

/// Lexicon rule used by the mock classifier.
///
/// Counts positive and negative stems and phrases; a hit right after a
/// negator ("don't give up") counts for the other side. `None` on a tie
/// or no hit at all.
pub fn keyword_valence(text: &str) -> Option<Valence> {
    let words = words(text);
    let (mut pos, mut neg) = (0i32, 0i32);
    let mut i = 0;
    while i < words.len() {
        let negated = i > 0 && NEGATORS.contains(&words[i - 1].as_str());
        let phrase = |list: &[&[&str]]| {
            list.iter().find(|p| words[i..].starts_with(&p.iter().map(|s| s.to_string()).collect::<Vec<_>>())).map(|p| p.len())
        };
        let hit = if let Some(len) = phrase(POSITIVE_PHRASES) {
            Some((1, len))
        } else if let Some(len) = phrase(NEGATIVE_PHRASES) {
            Some((-1, len))
        } else if POSITIVE_STEMS.iter().any(|s| words[i].starts_with(s)) {
            Some((1, 1))
        } else if NEGATIVE_STEMS.iter().any(|s| words[i].starts_with(s)) {
            Some((-1, 1))
        } else {
            None
        };
        match hit {
            Some((sign, len)) => {
                let sign = if negated { -sign } else { sign };
                if sign > 0 {
                    pos += 1;
                } else {
                    neg += 1;
                }
                i += len;
            }
            None => i += 1,
        }
    }
    match pos.cmp(&neg) {
        std::cmp::Ordering::Greater => Some(Valence::Positive),
        std::cmp::Ordering::Less => Some(Valence::Negative),
        std::cmp::Ordering::Equal => None,
    }
}

/// Outcome of [`Agents::select_branch`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BranchChoice {
    pub branch_id: BranchId,
    /// Valence reported by the classifier, if it produced one.
    pub valence: Option<Valence>,
    pub trace: Option<AgentTrace>,
}

impl Agents {
    /// Picks the branch of `chapter` that matches the valence of `response`.
    ///
    /// A single branch is returned without a provider call. An unknown or
    /// unmatched valence falls back to the first-listed branch.
    pub fn select_branch(
        &self,
        chapter: &ChapterSpec,
        question: &str,
        response: &str,
    ) -> Result<BranchChoice, AgentError> {
        let first = chapter.branches.first().ok_or_else(|| AgentError::Precondition {
            agent: AgentRole::Writing,
            reason: format!("chapter {} has no branches", chapter.index),
        })?;
        if chapter.branches.len() == 1 {
            return Ok(BranchChoice { branch_id: first.branch_id.clone(), valence: None, trace: None });
        }
        let options = chapter
            .branches
            .iter()
            .map(|b| format!("{} ({})", b.branch_id, b.valence))
            .collect::<Vec<_>>()
            .join(", ");
        let bindings = vec![
            (slots::CHILD_RESPONSE, response.to_string()),
            (slots::QUESTION, question.to_string()),
            (slots::BRANCH_OPTIONS, options),
        ];
        let (raw, mut trace) = self.call_text(tasks::BRANCH_VALENCE, bindings, 1, |raw| Ok(raw.to_string()))?;
        let valence = raw.split_whitespace().next().and_then(|w| {
            Valence::parse(w.trim_matches(|c: char| !c.is_alphanumeric()))
        });
        let branch = valence
            .and_then(|v| chapter.branches.iter().find(|b| b.valence == v))
            .unwrap_or(first);
        trace.validated_output = branch.branch_id.to_string();
        Ok(BranchChoice { branch_id: branch.branch_id.clone(), valence, trace: Some(trace) })
    }
}
