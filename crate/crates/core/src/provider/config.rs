use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{CassetteError, RetryPolicy};
use crate::canon::{self, CanonError};

pub const CONFIG_DOCUMENT: &str = "provider_config";
pub const DEFAULT_TIMEOUT_MS: u64 = 30_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    Mock,
    Replay,
    Remote,
}

impl Backend {
    pub fn parse(text: &str) -> Option<Self> {
        match text.trim().to_ascii_lowercase().as_str() {
            "mock" => Some(Backend::Mock),
            "replay" => Some(Backend::Replay),
            "remote" => Some(Backend::Remote),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RemoteEndpoint {
    pub url: String,
    /// Name of the environment variable holding the bearer credential.
    pub credential_env: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProviderConfig {
    pub text_backend: Backend,
    pub image_backend: Backend,
    pub tts_backend: Backend,
    pub asr_backend: Backend,
    pub remote: Option<RemoteEndpoint>,
    pub cassette: Option<PathBuf>,
    pub timeout_ms: u64,
    pub max_retries: u32,
    pub seed: u64,
    pub voice_profile: String,
}

impl Default for ProviderConfig {
    fn default() -> Self {
        Self {
            text_backend: Backend::Mock,
            image_backend: Backend::Mock,
            tts_backend: Backend::Mock,
            asr_backend: Backend::Mock,
            remote: None,
            cassette: None,
            timeout_ms: DEFAULT_TIMEOUT_MS,
            max_retries: 2,
            seed: 0,
            voice_profile: "storyteller".into(),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("invalid provider config: {0}")]
    Invalid(String),
    #[error("cannot read provider config: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Document(#[from] CanonError),
    #[error(transparent)]
    Cassette(#[from] CassetteError),
}

impl ProviderConfig {
    pub fn mock(seed: u64) -> Self {
        Self { seed, ..Self::default() }
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)?;
        Ok(canon::from_document(CONFIG_DOCUMENT, &text)?)
    }

    pub fn to_document(&self) -> Result<String, CanonError> {
        canon::to_document(CONFIG_DOCUMENT, self)
    }

    /// Applies `TALEWEAVE_TEXT_BACKEND`, `TALEWEAVE_SEED` and
    /// `TALEWEAVE_TIMEOUT_MS` from `lookup`.
    pub fn apply_env(
        &mut self,
        lookup: impl Fn(&str) -> Option<String>,
    ) -> Result<(), ConfigError> {
        if let Some(v) = lookup("TALEWEAVE_TEXT_BACKEND") {
            self.text_backend = Backend::parse(&v)
                .ok_or_else(|| ConfigError::Invalid(format!("TALEWEAVE_TEXT_BACKEND={v}")))?;
        }
        if let Some(v) = lookup("TALEWEAVE_SEED") {
            self.seed = v
                .trim()
                .parse()
                .map_err(|_| ConfigError::Invalid(format!("TALEWEAVE_SEED={v}")))?;
        }
        if let Some(v) = lookup("TALEWEAVE_TIMEOUT_MS") {
            self.timeout_ms = v
                .trim()
                .parse()
                .map_err(|_| ConfigError::Invalid(format!("TALEWEAVE_TIMEOUT_MS={v}")))?;
        }
        Ok(())
    }

    pub fn from_env_overrides(mut self) -> Result<Self, ConfigError> {
        self.apply_env(|k| std::env::var(k).ok())?;
        Ok(self)
    }

    pub fn uses(&self, backend: Backend) -> bool {
        [self.text_backend, self.image_backend, self.tts_backend, self.asr_backend]
            .contains(&backend)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.timeout_ms == 0 {
            return Err(ConfigError::Invalid("timeout_ms must be > 0".into()));
        }
        if self.uses(Backend::Replay) {
            match &self.cassette {
                Some(path) if path.is_file() => {}
                Some(path) => {
                    return Err(ConfigError::Invalid(format!(
                        "replay cassette {} does not exist",
                        path.display()
                    )))
                }
                None => return Err(ConfigError::Invalid("replay mode requires a cassette".into())),
            }
        }
        if self.uses(Backend::Remote) && self.remote.is_none() {
            return Err(ConfigError::Invalid("remote mode requires an endpoint".into()));
        }
        Ok(())
    }

    pub fn retry_policy(&self) -> RetryPolicy {
        RetryPolicy {
            timeout: Duration::from_millis(self.timeout_ms),
            max_retries: self.max_retries,
            initial_backoff: Duration::from_millis(250),
        }
    }
}
