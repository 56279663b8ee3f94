//! Deterministic offline backend.
//!
//! Text answers come from one fixed template per agent task, filled from the
//! request context. Variant phrasings are picked by a token derived from the
//! seed and the request digest, so output is a pure function of both.

use std::sync::Arc;

use super::media::{placeholder_png, read_wav_marker, speech_marker_wav};
use super::{
    digest_parts, tts_digest, AgentRole, AudioResult, ImageProvider, ImageRequest, ImageResult,
    ProviderError, SpeechRecognizer, SpeechSynthesizer, TextProvider, TextRequest, TextResult,
};
use crate::agents::{keyword_valence, outline_text, personalize, slots, tasks, PLACEHOLDER_RESPONSE};
use crate::assets::{AssetRef, AssetStore};
use crate::domain::{CopingSubscale, Valence};

pub struct MockProvider {
    seed: u64,
    assets: Arc<AssetStore>,
}

impl MockProvider {
    pub fn new(seed: u64, assets: Arc<AssetStore>) -> Self {
        Self { seed, assets }
    }

    fn token(&self, digest: &str) -> u64 {
        let mixed = digest_parts(&["mock", &self.seed.to_string(), digest]);
        u64::from_str_radix(&mixed[..16], 16).expect("hex digest")
    }

    fn pick<'a>(&self, req: &TextRequest, options: &[&'a str]) -> &'a str {
        options[(self.token(&req.digest()) % options.len() as u64) as usize]
    }
}

fn slot<'a>(req: &'a TextRequest, label: &str) -> &'a str {
    req.context_value(label).unwrap_or("")
}

fn title_case(text: &str) -> String {
    text.split_whitespace()
        .map(|word| {
            word.split('-')
                .map(|part| {
                    let mut chars = part.chars();
                    match chars.next() {
                        Some(c) => c.to_uppercase().chain(chars).collect(),
                        None => String::new(),
                    }
                })
                .collect::<Vec<_>>()
                .join("-")
        })
        .collect::<Vec<_>>()
        .join(" ")
}

fn lower_first(text: &str) -> String {
    let mut chars = text.chars();
    match chars.next() {
        Some(c) => c.to_lowercase().chain(chars).collect(),
        None => String::new(),
    }
}

fn sentence(text: &str) -> String {
    let text = text.trim();
    if text.ends_with(['.', '!', '?']) {
        text.to_string()
    } else {
        format!("{text}.")
    }
}

fn strip_end_punctuation(text: &str) -> &str {
    text.trim().trim_end_matches(['.', '!', '?', '。', '！', '？']).trim_end()
}

impl MockProvider {
    fn outline(&self, req: &TextRequest) -> String {
        let brief = slot(req, slots::BRIEF);
        let premise = brief.split(';').next().unwrap_or(brief).trim();
        let premise = if premise.is_empty() { "a hard day at school" } else { premise };
        let pattern = self.pick(
            req,
            &["A Little Story About {}", "The Brave Heart and {}", "Growing Through {}"],
        );
        let title = pattern.replace("{}", &title_case(premise));
        let chapters = [
            (
                format!("The protagonist prepares for a big day at school while facing {premise}."),
                format!("The protagonist notices worried feelings about {premise} and wonders what to do."),
            ),
            (
                format!("The protagonist meets the hardest moment of {premise}."),
                "Things get difficult, and the protagonist must choose how to respond.".to_string(),
            ),
            (
                "Friends and grown-ups notice how the protagonist is feeling.".to_string(),
                "The protagonist tries a new way to cope and sees what happens.".to_string(),
            ),
            (
                format!("The challenge of {premise} comes to an end."),
                "The protagonist looks back on what was learned and feels proud.".to_string(),
            ),
        ];
        outline_text::render(&title, &chapters)
    }

    fn outline_rewrite(&self, req: &TextRequest) -> Result<String, ProviderError> {
        let current = outline_text::parse(slot(req, slots::CURRENT_OUTLINE))
            .map_err(|e| ProviderError::Payload(format!("current outline: {e}")))?;
        let k: usize = slot(req, slots::REWRITE_CHAPTER)
            .trim()
            .parse()
            .ok()
            .filter(|k| (1..=current.chapters.len()).contains(k))
            .ok_or_else(|| ProviderError::Payload("rewrite chapter out of range".into()))?;
        let instruction = strip_end_punctuation(slot(req, slots::INSTRUCTION));
        let mut chapters = current.chapters;
        let plot = &mut chapters[k - 1].1;
        *plot = format!("{} (Revised: {}.)", plot.trim(), instruction);
        Ok(outline_text::render(&current.title, &chapters))
    }

    fn character(&self, req: &TextRequest) -> String {
        let name = slot(req, slots::PROTAGONIST);
        let look = self.pick(
            req,
            &[
                "soft round ears and a bright smile",
                "a cheerful scarf and curious eyes",
                "a brave little cape and rosy cheeks",
            ],
        );
        format!(
            "{name} is a gentle storybook hero drawn from a child's picture, with {look}. \
             {name} is kind, curious and ready for an adventure."
        )
    }

    fn question(&self, req: &TextRequest) -> String {
        let name = slot(req, slots::PROTAGONIST);
        let narration = sentence(&personalize(slot(req, slots::CHAPTER_PLOT), name));
        let ask = self.pick(
            req,
            &[
                "What do you think {} will do next?",
                "If you were {}, what would you do?",
                "What should {} do now?",
            ],
        );
        format!("{narration} {}", ask.replace("{}", name))
    }

    fn writing(&self, req: &TextRequest) -> String {
        let name = slot(req, slots::PROTAGONIST);
        let response = slot(req, slots::CHILD_RESPONSE).trim();
        let reaction = if response.is_empty() || response == PLACEHOLDER_RESPONSE {
            format!("{name} was quiet for a moment, and the story gently carried on.")
        } else {
            format!(
                "{name} stopped and thought about what to do: {}.",
                lower_first(strip_end_punctuation(response))
            )
        };
        let closing = self.pick(
            req,
            &[
                "{} took a deep breath of courage, ready for whatever came next.",
                "With a small smile, {} felt a little stronger than before.",
                "{} knew that every step, big or small, was worth taking.",
            ],
        );
        [
            sentence(&personalize(slot(req, slots::CHAPTER_SETTING), name)),
            sentence(&personalize(slot(req, slots::CHAPTER_PLOT), name)),
            reaction,
            closing.replace("{}", name),
        ]
        .join("\n\n")
    }

    fn reflection(&self, req: &TextRequest) -> String {
        let name = slot(req, slots::PROTAGONIST);
        let title = slot(req, slots::OUTLINE_TITLE);
        let praise = self.pick(
            req,
            &[
                "You did a wonderful job creating this story!",
                "Thank you for your brave and clever ideas!",
                "You are a fantastic storyteller!",
            ],
        );
        format!(
            "In \"{title}\", {name} faced a hard moment, tried new ideas, and learned that \
             feelings can be understood and handled one step at a time. {praise}"
        )
    }

    fn analysis(&self, req: &TextRequest) -> String {
        let name = slot(req, slots::PROTAGONIST);
        let answers: Vec<&str> = slot(req, slots::DIALOGUE)
            .lines()
            .filter_map(|line| {
                let (tag, text) = line.split_once(':')?;
                tag.starts_with('A').then_some(text.trim())
            })
            .collect();
        let mut out = String::new();
        let mut active = 0;
        for (i, answer) in answers.iter().enumerate() {
            let hint = if *answer == PLACEHOLDER_RESPONSE || answer.is_empty() {
                "no answer was given here, which may mean the moment felt hard to talk about"
                    .to_string()
            } else {
                match keyword_valence(answer) {
                    Some(Valence::Positive) => {
                        active += 1;
                        "an active, problem-focused way of coping".to_string()
                    }
                    Some(Valence::Negative) => "a wish to step away from the difficulty".to_string(),
                    _ => "careful thinking about the situation".to_string(),
                }
            };
            out.push_str(&format!(
                "COMMENT {}: At this milestone the child's idea for {name} shows {hint}.\n",
                i + 1
            ));
        }
        out.push_str(&format!(
            "ANALYSIS: Across the story the child offered {active} active coping idea(s) out of \
             {} milestone(s), helping {name} move through worry toward calm.\n",
            answers.len()
        ));
        let advice = self.pick(
            req,
            &[
                "Talk with your child about the moments in the story that felt hard, and praise the ideas that helped.",
                "Invite your child to retell the story and try one of the coping ideas together this week.",
            ],
        );
        out.push_str(&format!("ADVICE: {advice}\n"));
        out
    }

    fn coping(&self, req: &TextRequest) -> String {
        let text = slot(req, slots::RESPONSE_TEXT).to_lowercase();
        let has = |words: &[&str]| words.iter().any(|w| text.contains(w));
        let subscale = if has(&["breath"]) {
            CopingSubscale::PhysicalReleaseOfEmotion
        } else if has(&["forget"]) {
            CopingSubscale::Repression
        } else if has(&["calm down", "look at the"]) {
            CopingSubscale::DistractingActions
        } else if has(&["mental health", "counselor"]) {
            CopingSubscale::SupportForFeelings
        } else if has(&["will forgive", "will be happy"]) {
            CopingSubscale::OptimisticThinking
        } else if has(&["never feel", "from now on"]) {
            CopingSubscale::PositiveThinking
        } else if has(&["goal", "decide"]) {
            CopingSubscale::CognitiveDecisionMaking
        } else if has(&["why"]) {
            CopingSubscale::SeekingUnderstanding
        } else if has(&["stopped playing", "instead", "avoid"]) {
            CopingSubscale::AvoidantActions
        } else {
            CopingSubscale::DirectProblemSolving
        };
        subscale.name().to_string()
    }
}

impl TextProvider for MockProvider {
    fn generate_text(&self, req: &TextRequest) -> Result<TextResult, ProviderError> {
        let task = req.context_value(slots::TASK).unwrap_or(req.role.as_str());
        let text = match task {
            tasks::OUTLINE => self.outline(req),
            tasks::OUTLINE_REWRITE => self.outline_rewrite(req)?,
            tasks::CHARACTER => self.character(req),
            tasks::QUESTION => self.question(req),
            tasks::WRITING => self.writing(req),
            tasks::REFLECTION => self.reflection(req),
            tasks::ANALYSIS => self.analysis(req),
            tasks::BRANCH_VALENCE => keyword_valence(slot(req, slots::CHILD_RESPONSE))
                .map_or("unclear", Valence::as_str)
                .to_string(),
            tasks::COPING_SUBSCALE => self.coping(req),
            _ => match req.role {
                AgentRole::Drawing => "A four-panel picture of the chapter.".to_string(),
                role => format!("{role} output for: {}", req.prompt.trim()),
            },
        };
        Ok(TextResult { text, latency_ms: 0 })
    }
}

impl ImageProvider for MockProvider {
    fn generate_image(&self, req: &ImageRequest) -> Result<ImageResult, ProviderError> {
        let digest = digest_parts(&["mock-image", &self.seed.to_string(), &req.digest()]);
        let bytes = placeholder_png(req.layout, &digest)?;
        let image = self.assets.put(&bytes, "png")?;
        Ok(ImageResult { image, layout: req.layout, latency_ms: 0 })
    }
}

impl SpeechSynthesizer for MockProvider {
    fn synthesize_speech(
        &self,
        text: &str,
        voice_profile: &str,
    ) -> Result<AudioResult, ProviderError> {
        if text.trim().is_empty() {
            return Err(ProviderError::EmptyInput("text-to-speech"));
        }
        let bytes = speech_marker_wav(text, &tts_digest(text, voice_profile));
        let audio = self.assets.put(&bytes, "wav")?;
        Ok(AudioResult { audio, mime: "audio/wav".into(), latency_ms: 0 })
    }
}

impl SpeechRecognizer for MockProvider {
    fn transcribe(&self, audio: &AssetRef) -> Result<String, ProviderError> {
        let bytes = self.assets.read(audio)?;
        Ok(read_wav_marker(&bytes)?.unwrap_or_default())
    }
}
