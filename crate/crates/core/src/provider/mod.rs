//! Generative capabilities behind four narrow interfaces.
//!
//! Text generation, image generation, speech synthesis and speech
//! recognition each have a trait. Every trait has a deterministic mock
//! backend, a cassette replay backend and a generic HTTP JSON backend;
//! [`Gateway`] bundles one implementation of each.

mod cassette;
mod config;
pub mod media;
mod mock;
mod remote;
mod retry;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::assets::{AssetError, AssetRef, AssetStore};

pub use cassette::{
    record_cassette, Cassette, CassetteEntry, CassetteError, RecordedRequest, Recorder,
    ReplayProvider, CASSETTE_DOCUMENT,
};
pub use config::{Backend, ConfigError, ProviderConfig, RemoteEndpoint};
pub use media::Layout;
pub use mock::MockProvider;
pub use remote::RemoteProvider;
pub use retry::RetryPolicy;

/// Role tag of the requesting agent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgentRole {
    Outline,
    Character,
    Question,
    Writing,
    Drawing,
    Reflection,
    Analysis,
}

impl AgentRole {
    pub const ALL: [AgentRole; 7] = [
        AgentRole::Outline,
        AgentRole::Character,
        AgentRole::Question,
        AgentRole::Writing,
        AgentRole::Drawing,
        AgentRole::Reflection,
        AgentRole::Analysis,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            AgentRole::Outline => "outline",
            AgentRole::Character => "character",
            AgentRole::Question => "question",
            AgentRole::Writing => "writing",
            AgentRole::Drawing => "drawing",
            AgentRole::Reflection => "reflection",
            AgentRole::Analysis => "analysis",
        }
    }

    pub fn parse(text: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|r| r.as_str() == text)
    }
}

impl fmt::Display for AgentRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContextSegment {
    pub label: String,
    pub content: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TextRequest {
    pub role: AgentRole,
    pub prompt: String,
    pub context: Vec<ContextSegment>,
}

impl TextRequest {
    pub fn new(role: AgentRole, prompt: impl Into<String>) -> Self {
        Self { role, prompt: prompt.into(), context: Vec::new() }
    }

    pub fn with(mut self, label: impl Into<String>, content: impl Into<String>) -> Self {
        self.context.push(ContextSegment { label: label.into(), content: content.into() });
        self
    }

    pub fn context_value(&self, label: &str) -> Option<&str> {
        self.context.iter().find(|c| c.label == label).map(|c| c.content.as_str())
    }

    /// Stable cassette key over (role, prompt, context sorted by label then content).
    pub fn digest(&self) -> String {
        let mut segments: Vec<(&str, &str)> =
            self.context.iter().map(|c| (c.label.as_str(), c.content.as_str())).collect();
        segments.sort();
        let mut parts = vec!["text", self.role.as_str(), self.prompt.as_str()];
        for (label, content) in segments {
            parts.push(label);
            parts.push(content);
        }
        digest_parts(&parts)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TextResult {
    pub text: String,
    pub latency_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImageRequest {
    pub prompt: String,
    pub reference_images: Vec<AssetRef>,
    pub layout: Layout,
}

impl ImageRequest {
    pub fn digest(&self) -> String {
        let mut parts = vec!["image", self.layout.as_str(), self.prompt.as_str()];
        parts.extend(self.reference_images.iter().map(AssetRef::as_str));
        digest_parts(&parts)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImageResult {
    pub image: AssetRef,
    pub layout: Layout,
    pub latency_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AudioResult {
    pub audio: AssetRef,
    pub mime: String,
    pub latency_ms: u64,
}

pub(crate) fn tts_digest(text: &str, voice_profile: &str) -> String {
    digest_parts(&["tts", voice_profile, text])
}

pub(crate) fn asr_digest(audio_bytes: &[u8]) -> String {
    hex::encode(Sha256::digest([b"asr\0".as_slice(), audio_bytes].concat()))
}

/// Length-prefixed SHA-256 so that no two part lists collide by concatenation.
pub(crate) fn digest_parts(parts: &[&str]) -> String {
    let mut hasher = Sha256::new();
    for part in parts {
        hasher.update((part.len() as u64).to_le_bytes());
        hasher.update(part.as_bytes());
    }
    hex::encode(hasher.finalize())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Capability {
    Text,
    Image,
    Tts,
    Asr,
}

impl fmt::Display for Capability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Capability::Text => "text",
            Capability::Image => "image",
            Capability::Tts => "tts",
            Capability::Asr => "asr",
        })
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ProviderError {
    #[error("{capability} request timed out after {attempts} attempt(s) of {timeout_ms} ms")]
    Timeout { capability: Capability, attempts: u32, timeout_ms: u64 },
    #[error("replay miss: cassette has no entry for request digest {digest}")]
    ReplayMiss { digest: String },
    #[error("invalid reference: {0}")]
    InvalidReference(#[from] AssetError),
    #[error("empty {0} input rejected")]
    EmptyInput(&'static str),
    #[error("unsupported audio format: {0}")]
    UnsupportedAudio(String),
    #[error("remote backend returned status {status}: {message}")]
    Remote { status: u16, message: String },
    #[error("remote transport error: {0}")]
    Transport(String),
    #[error("malformed backend payload: {0}")]
    Payload(String),
    #[error(transparent)]
    Cassette(#[from] CassetteError),
    #[error("injected failure: {0}")]
    Injected(String),
}

impl From<media::MediaError> for ProviderError {
    fn from(e: media::MediaError) -> Self {
        match e {
            media::MediaError::UnsupportedAudio(m) => ProviderError::UnsupportedAudio(m),
            other => ProviderError::Payload(other.to_string()),
        }
    }
}

pub trait TextProvider: Send + Sync {
    fn generate_text(&self, req: &TextRequest) -> Result<TextResult, ProviderError>;
}

pub trait ImageProvider: Send + Sync {
    fn generate_image(&self, req: &ImageRequest) -> Result<ImageResult, ProviderError>;
}

pub trait SpeechSynthesizer: Send + Sync {
    fn synthesize_speech(&self, text: &str, voice_profile: &str)
        -> Result<AudioResult, ProviderError>;
}

pub trait SpeechRecognizer: Send + Sync {
    fn transcribe(&self, audio: &AssetRef) -> Result<String, ProviderError>;
}

/// One implementation of each capability plus the asset store they write to.
#[derive(Clone)]
pub struct Gateway {
    pub text: Arc<dyn TextProvider>,
    pub image: Arc<dyn ImageProvider>,
    pub tts: Arc<dyn SpeechSynthesizer>,
    pub asr: Arc<dyn SpeechRecognizer>,
    pub assets: Arc<AssetStore>,
}

impl fmt::Debug for Gateway {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Gateway").field("assets", &self.assets.root()).finish_non_exhaustive()
    }
}

impl Gateway {
    /// All four capabilities served by the deterministic mock.
    pub fn mock(seed: u64, assets: Arc<AssetStore>) -> Self {
        let mock = Arc::new(MockProvider::new(seed, assets.clone()));
        Self { text: mock.clone(), image: mock.clone(), tts: mock.clone(), asr: mock, assets }
    }

    pub fn from_config(cfg: &ProviderConfig, assets: Arc<AssetStore>) -> Result<Self, ConfigError> {
        cfg.validate()?;
        let mock = Arc::new(MockProvider::new(cfg.seed, assets.clone()));
        let replay = match &cfg.cassette {
            Some(path) if cfg.uses(Backend::Replay) => {
                Some(Arc::new(ReplayProvider::open(path, assets.clone())?))
            }
            _ => None,
        };
        let remote = match &cfg.remote {
            Some(endpoint) if cfg.uses(Backend::Remote) => Some(Arc::new(RemoteProvider::new(
                endpoint.clone(),
                cfg.retry_policy(),
                assets.clone(),
            )?)),
            _ => None,
        };
        let missing = |what: &str| ConfigError::Invalid(format!("{what} backend is not configured"));
        macro_rules! pick {
            ($backend:expr) => {
                match $backend {
                    Backend::Mock => mock.clone() as _,
                    Backend::Replay => replay.clone().ok_or_else(|| missing("replay"))? as _,
                    Backend::Remote => remote.clone().ok_or_else(|| missing("remote"))? as _,
                }
            };
        }
        Ok(Self {
            text: pick!(cfg.text_backend),
            image: pick!(cfg.image_backend),
            tts: pick!(cfg.tts_backend),
            asr: pick!(cfg.asr_backend),
            assets,
        })
    }

    pub fn with_text(mut self, text: Arc<dyn TextProvider>) -> Self {
        self.text = text;
        self
    }

    pub fn with_image(mut self, image: Arc<dyn ImageProvider>) -> Self {
        self.image = image;
        self
    }

    pub fn with_tts(mut self, tts: Arc<dyn SpeechSynthesizer>) -> Self {
        self.tts = tts;
        self
    }

    pub fn with_asr(mut self, asr: Arc<dyn SpeechRecognizer>) -> Self {
        self.asr = asr;
        self
    }

    pub fn generate_text(&self, req: &TextRequest) -> Result<TextResult, ProviderError> {
        if req.prompt.trim().is_empty() {
            return Err(ProviderError::EmptyInput("prompt"));
        }
        self.text.generate_text(req)
    }

    pub fn generate_image(&self, req: &ImageRequest) -> Result<ImageResult, ProviderError> {
        for reference in &req.reference_images {
            self.assets.resolve(reference)?;
        }
        self.image.generate_image(req)
    }

    pub fn synthesize_speech(
        &self,
        text: &str,
        voice_profile: &str,
    ) -> Result<AudioResult, ProviderError> {
        if text.trim().is_empty() {
            return Err(ProviderError::EmptyInput("text-to-speech"));
        }
        self.tts.synthesize_speech(text, voice_profile)
    }

    pub fn transcribe(&self, audio: &AssetRef) -> Result<String, ProviderError> {
        self.assets.resolve(audio)?;
        self.asr.transcribe(audio)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_ignores_context_order_but_not_content() {
        let a = TextRequest::new(AgentRole::Question, "p").with("x", "1").with("y", "2");
        let b = TextRequest::new(AgentRole::Question, "p").with("y", "2").with("x", "1");
        let c = TextRequest::new(AgentRole::Question, "p").with("x", "1").with("y", "3");
        assert_eq!(a.digest(), b.digest());
        assert_ne!(a.digest(), c.digest());
        let d = TextRequest::new(AgentRole::Writing, "p").with("x", "1").with("y", "2");
        assert_ne!(a.digest(), d.digest());
    }

    #[test]
    fn digest_parts_are_length_prefixed() {
        assert_ne!(digest_parts(&["ab", "c"]), digest_parts(&["a", "bc"]));
    }
}
