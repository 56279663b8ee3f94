//! Record/replay of provider traffic.
//!
//! A cassette is one canonical document listing `{digest, role_tag, response}`
//! entries. [`Recorder`] wraps live providers and appends every exchange;
//! [`ReplayProvider`] answers from the cassette and fails with a replay miss
//! for anything it has not seen.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use base64::engine::general_purpose::STANDARD as B64;
use base64::Engine as _;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{
    asr_digest, tts_digest, AudioResult, Gateway, ImageProvider, ImageRequest, ImageResult,
    Layout, ProviderError, SpeechRecognizer, SpeechSynthesizer, TextProvider, TextRequest,
    TextResult,
};
use crate::assets::{AssetRef, AssetStore};
use crate::canon::{self, CanonError};

pub const CASSETTE_DOCUMENT: &str = "cassette";

#[derive(Debug, thiserror::Error)]
pub enum CassetteError {
    #[error("cassette I/O error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("cassette {path}: {source}")]
    Document { path: PathBuf, source: CanonError },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CassetteEntry {
    pub digest: String,
    pub role_tag: String,
    pub response: Value,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Cassette {
    pub entries: Vec<CassetteEntry>,
}

impl Cassette {
    pub fn load(path: &Path) -> Result<Self, CassetteError> {
        let text = fs::read_to_string(path)
            .map_err(|source| CassetteError::Io { path: path.into(), source })?;
        canon::from_document(CASSETTE_DOCUMENT, &text)
            .map_err(|source| CassetteError::Document { path: path.into(), source })
    }

    pub fn save(&self, path: &Path) -> Result<(), CassetteError> {
        let text = canon::to_document(CASSETTE_DOCUMENT, self)
            .map_err(|source| CassetteError::Document { path: path.into(), source })?;
        let io = |source| CassetteError::Io { path: path.into(), source };
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(io)?;
        }
        let tmp = path.with_extension("tmp");
        fs::write(&tmp, text).map_err(io)?;
        fs::rename(&tmp, path).map_err(io)
    }

    pub fn get(&self, digest: &str) -> Option<&CassetteEntry> {
        self.entries.iter().find(|e| e.digest == digest)
    }
}

pub struct ReplayProvider {
    responses: BTreeMap<String, Value>,
    assets: Arc<AssetStore>,
}

impl ReplayProvider {
    pub fn open(path: &Path, assets: Arc<AssetStore>) -> Result<Self, CassetteError> {
        Ok(Self::new(Cassette::load(path)?, assets))
    }

    pub fn new(cassette: Cassette, assets: Arc<AssetStore>) -> Self {
        let responses = cassette.entries.into_iter().map(|e| (e.digest, e.response)).collect();
        Self { responses, assets }
    }

    fn lookup(&self, digest: String) -> Result<&Value, ProviderError> {
        self.responses.get(&digest).ok_or(ProviderError::ReplayMiss { digest })
    }

    fn field<'a>(value: &'a Value, key: &str) -> Result<&'a str, ProviderError> {
        value
            .get(key)
            .and_then(Value::as_str)
            .ok_or_else(|| ProviderError::Payload(format!("cassette response lacks {key:?}")))
    }

    fn restore(&self, value: &Value, key: &str, ext: &str) -> Result<AssetRef, ProviderError> {
        let bytes = B64
            .decode(Self::field(value, key)?)
            .map_err(|e| ProviderError::Payload(format!("bad base64 in cassette: {e}")))?;
        Ok(self.assets.put(&bytes, ext)?)
    }
}

impl TextProvider for ReplayProvider {
    fn generate_text(&self, req: &TextRequest) -> Result<TextResult, ProviderError> {
        let value = self.lookup(req.digest())?;
        Ok(TextResult { text: Self::field(value, "text")?.to_string(), latency_ms: 0 })
    }
}

impl ImageProvider for ReplayProvider {
    fn generate_image(&self, req: &ImageRequest) -> Result<ImageResult, ProviderError> {
        let value = self.lookup(req.digest())?;
        let layout = Layout::parse(Self::field(value, "layout")?)
            .ok_or_else(|| ProviderError::Payload("unknown layout in cassette".into()))?;
        let image = self.restore(value, "image_base64", "png")?;
        Ok(ImageResult { image, layout, latency_ms: 0 })
    }
}

impl SpeechSynthesizer for ReplayProvider {
    fn synthesize_speech(
        &self,
        text: &str,
        voice_profile: &str,
    ) -> Result<AudioResult, ProviderError> {
        let value = self.lookup(tts_digest(text, voice_profile))?;
        let mime = Self::field(value, "mime")?.to_string();
        let audio = self.restore(value, "audio_base64", if mime == "audio/wav" { "wav" } else { "bin" })?;
        Ok(AudioResult { audio, mime, latency_ms: 0 })
    }
}

impl SpeechRecognizer for ReplayProvider {
    fn transcribe(&self, audio: &AssetRef) -> Result<String, ProviderError> {
        let bytes = self.assets.read(audio)?;
        let value = self.lookup(asr_digest(&bytes))?;
        Ok(Self::field(value, "transcript")?.to_string())
    }
}

/// Wraps live providers and appends every exchange to a cassette file.
///
/// Writes go through one mutex and the file is rewritten atomically after
/// each new entry.
pub struct Recorder {
    inner: Gateway,
    path: PathBuf,
    cassette: Mutex<Cassette>,
}

impl Recorder {
    pub fn new(inner: Gateway, path: impl Into<PathBuf>) -> Self {
        Self { inner, path: path.into(), cassette: Mutex::new(Cassette::default()) }
    }

    /// A gateway whose four capabilities all record through `self`.
    pub fn into_gateway(self) -> (Gateway, Arc<Recorder>) {
        let assets = self.inner.assets.clone();
        let recorder = Arc::new(self);
        let gateway = Gateway {
            text: recorder.clone(),
            image: recorder.clone(),
            tts: recorder.clone(),
            asr: recorder.clone(),
            assets,
        };
        (gateway, recorder)
    }

    pub fn cassette(&self) -> Cassette {
        self.cassette.lock().expect("cassette lock").clone()
    }

    fn append(&self, digest: String, role_tag: &str, response: Value) -> Result<(), ProviderError> {
        let mut cassette = self.cassette.lock().expect("cassette lock");
        if cassette.get(&digest).is_none() {
            cassette.entries.push(CassetteEntry { digest, role_tag: role_tag.into(), response });
            cassette.save(&self.path)?;
        }
        Ok(())
    }
}

impl TextProvider for Recorder {
    fn generate_text(&self, req: &TextRequest) -> Result<TextResult, ProviderError> {
        let result = self.inner.text.generate_text(req)?;
        self.append(req.digest(), req.role.as_str(), json!({ "text": result.text }))?;
        Ok(result)
    }
}

impl ImageProvider for Recorder {
    fn generate_image(&self, req: &ImageRequest) -> Result<ImageResult, ProviderError> {
        let result = self.inner.image.generate_image(req)?;
        let bytes = self.inner.assets.read(&result.image)?;
        self.append(
            req.digest(),
            "image",
            json!({ "image_base64": B64.encode(bytes), "layout": result.layout.as_str() }),
        )?;
        Ok(result)
    }
}

impl SpeechSynthesizer for Recorder {
    fn synthesize_speech(
        &self,
        text: &str,
        voice_profile: &str,
    ) -> Result<AudioResult, ProviderError> {
        let result = self.inner.tts.synthesize_speech(text, voice_profile)?;
        let bytes = self.inner.assets.read(&result.audio)?;
        self.append(
            tts_digest(text, voice_profile),
            "tts",
            json!({ "audio_base64": B64.encode(bytes), "mime": result.mime }),
        )?;
        Ok(result)
    }
}

impl SpeechRecognizer for Recorder {
    fn transcribe(&self, audio: &AssetRef) -> Result<String, ProviderError> {
        let transcript = self.inner.asr.transcribe(audio)?;
        let bytes = self.inner.assets.read(audio)?;
        self.append(asr_digest(&bytes), "asr", json!({ "transcript": transcript }))?;
        Ok(transcript)
    }
}

/// A request of any capability, for scripted recording.
#[derive(Debug, Clone)]
pub enum RecordedRequest {
    Text(TextRequest),
    Image(ImageRequest),
    Speech { text: String, voice_profile: String },
    Transcribe(AssetRef),
}

/// Runs `requests` against `inner`, writing every exchange to `path`.
pub fn record_cassette(
    inner: Gateway,
    path: &Path,
    requests: &[RecordedRequest],
) -> Result<Cassette, ProviderError> {
    let (gateway, recorder) = Recorder::new(inner, path).into_gateway();
    for request in requests {
        match request {
            RecordedRequest::Text(r) => drop(gateway.generate_text(r)?),
            RecordedRequest::Image(r) => drop(gateway.generate_image(r)?),
            RecordedRequest::Speech { text, voice_profile } => {
                drop(gateway.synthesize_speech(text, voice_profile)?)
            }
            RecordedRequest::Transcribe(audio) => drop(gateway.transcribe(audio)?),
        }
    }
    let cassette = recorder.cassette();
    cassette.save(path)?;
    Ok(cassette)
}
