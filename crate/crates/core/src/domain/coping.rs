//! Coping-strategy taxonomy: five dimensions, thirteen subscales.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CopingDimension {
    ProblemFocused,
    PositiveCognitiveReframing,
    Distraction,
    Avoidance,
    SupportSeeking,
}

impl CopingDimension {
    pub const ALL: [CopingDimension; 5] = [
        CopingDimension::ProblemFocused,
        CopingDimension::PositiveCognitiveReframing,
        CopingDimension::Distraction,
        CopingDimension::Avoidance,
        CopingDimension::SupportSeeking,
    ];

    pub fn label(self) -> &'static str {
        match self {
            CopingDimension::ProblemFocused => "Problem Focused Coping",
            CopingDimension::PositiveCognitiveReframing => "Positive Cognitive Reframing",
            CopingDimension::Distraction => "Distraction Strategies",
            CopingDimension::Avoidance => "Avoidance Strategies",
            CopingDimension::SupportSeeking => "Support Seeking Strategies",
        }
    }

    pub fn subscales(self) -> impl Iterator<Item = CopingSubscale> {
        CopingSubscale::ALL.into_iter().filter(move |s| s.dimension() == self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CopingSubscale {
    CognitiveDecisionMaking,
    DirectProblemSolving,
    SeekingUnderstanding,
    PositiveThinking,
    OptimisticThinking,
    Control,
    PhysicalReleaseOfEmotion,
    DistractingActions,
    AvoidantActions,
    Repression,
    WishfulThinking,
    SupportForFeelings,
    SupportForActions,
}

impl CopingSubscale {
    pub const ALL: [CopingSubscale; 13] = [
        CopingSubscale::CognitiveDecisionMaking,
        CopingSubscale::DirectProblemSolving,
        CopingSubscale::SeekingUnderstanding,
        CopingSubscale::PositiveThinking,
        CopingSubscale::OptimisticThinking,
        CopingSubscale::Control,
        CopingSubscale::PhysicalReleaseOfEmotion,
        CopingSubscale::DistractingActions,
        CopingSubscale::AvoidantActions,
        CopingSubscale::Repression,
        CopingSubscale::WishfulThinking,
        CopingSubscale::SupportForFeelings,
        CopingSubscale::SupportForActions,
    ];

    pub fn dimension(self) -> CopingDimension {
        use CopingSubscale::*;
        match self {
            CognitiveDecisionMaking | DirectProblemSolving | SeekingUnderstanding => {
                CopingDimension::ProblemFocused
            }
            PositiveThinking | OptimisticThinking | Control => {
                CopingDimension::PositiveCognitiveReframing
            }
            PhysicalReleaseOfEmotion | DistractingActions => CopingDimension::Distraction,
            AvoidantActions | Repression | WishfulThinking => CopingDimension::Avoidance,
            SupportForFeelings | SupportForActions => CopingDimension::SupportSeeking,
        }
    }

    /// Identifier form, e.g. `DirectProblemSolving`.
    pub fn name(self) -> &'static str {
        use CopingSubscale::*;
        match self {
            CognitiveDecisionMaking => "CognitiveDecisionMaking",
            DirectProblemSolving => "DirectProblemSolving",
            SeekingUnderstanding => "SeekingUnderstanding",
            PositiveThinking => "PositiveThinking",
            OptimisticThinking => "OptimisticThinking",
            Control => "Control",
            PhysicalReleaseOfEmotion => "PhysicalReleaseOfEmotion",
            DistractingActions => "DistractingActions",
            AvoidantActions => "AvoidantActions",
            Repression => "Repression",
            WishfulThinking => "WishfulThinking",
            SupportForFeelings => "SupportForFeelings",
            SupportForActions => "SupportForActions",
        }
    }

    /// Human-readable form, e.g. `Direct Problem Solving`.
    pub fn label(self) -> &'static str {
        use CopingSubscale::*;
        match self {
            CognitiveDecisionMaking => "Cognitive Decision Making",
            DirectProblemSolving => "Direct Problem Solving",
            SeekingUnderstanding => "Seeking Understanding",
            PositiveThinking => "Positive Thinking",
            OptimisticThinking => "Optimistic Thinking",
            Control => "Control",
            PhysicalReleaseOfEmotion => "Physical Release of Emotion",
            DistractingActions => "Distracting Actions",
            AvoidantActions => "Avoidant Actions",
            Repression => "Repression",
            WishfulThinking => "Wishful Thinking",
            SupportForFeelings => "Support for Feelings",
            SupportForActions => "Support for Actions",
        }
    }
}

impl fmt::Display for CopingSubscale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown coping subscale {0:?}")]
pub struct UnknownSubscale(pub String);

impl FromStr for CopingSubscale {
    type Err = UnknownSubscale;

    /// Accepts the identifier or the human-readable label, ignoring case,
    /// spaces and underscores. "Physical Release of Emotions" is accepted too.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let folded: String = s
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .map(|c| c.to_ascii_lowercase())
            .collect();
        let folded = folded.strip_suffix("emotions").map_or(folded.clone(), |p| format!("{p}emotion"));
        CopingSubscale::ALL
            .into_iter()
            .find(|sub| sub.name().to_ascii_lowercase() == folded)
            .ok_or_else(|| UnknownSubscale(s.to_string()))
    }
}

/// Identifies one milestone response: child `n`, chapter `m` (1..4).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ResponseCode {
    pub child: u32,
    pub milestone: u8,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("malformed response code {input:?}: expected \"C{{n}}-{{m}}\" with n ≥ 1 and m in 1..4")]
pub struct MalformedCode {
    pub input: String,
}

impl ResponseCode {
    pub fn new(child: u32, milestone: u8) -> Option<Self> {
        (child >= 1 && (1..=4).contains(&milestone)).then_some(Self { child, milestone })
    }

    pub fn parse(text: &str) -> Result<Self, MalformedCode> {
        let err = || MalformedCode { input: text.to_string() };
        let body = text.strip_prefix('C').ok_or_else(err)?;
        let (n, m) = body.split_once('-').ok_or_else(err)?;
        let digits = |s: &str| !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit());
        // Leading zeros would break the bijection with the formatter.
        if !digits(n) || !digits(m) || n.starts_with('0') || m.starts_with('0') {
            return Err(err());
        }
        let child: u32 = n.parse().map_err(|_| err())?;
        let milestone: u8 = m.parse().map_err(|_| err())?;
        Self::new(child, milestone).ok_or_else(err)
    }
}

impl fmt::Display for ResponseCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "C{}-{}", self.child, self.milestone)
    }
}

impl FromStr for ResponseCode {
    type Err = MalformedCode;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::parse(s)
    }
}

impl Serialize for ResponseCode {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ResponseCode {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        ResponseCode::parse(&text).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TagOrigin {
    Manual,
    Suggested,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CopingTag {
    pub code: ResponseCode,
    pub dimension: CopingDimension,
    pub subscale: CopingSubscale,
    pub origin: TagOrigin,
}

impl CopingTag {
    /// The dimension is always derived from the subscale.
    pub fn new(code: ResponseCode, subscale: CopingSubscale, origin: TagOrigin) -> Self {
        Self { code, dimension: subscale.dimension(), subscale, origin }
    }
}
