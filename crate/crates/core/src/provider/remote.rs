//! Generic HTTP JSON backend.
//!
//! Every capability is one `POST` under the configured base URL:
//!
//! | path        | request body                                          | response body                  |
//! |-------------|-------------------------------------------------------|--------------------------------|
//! | `/v1/text`  | `{role, prompt, context: [{label, content}]}`         | `{text}`                       |
//! | `/v1/image` | `{prompt, layout, reference_images: [{path, data_base64}]}` | `{image_base64, layout, mime}` |
//! | `/v1/tts`   | `{text, voice_profile}`                               | `{audio_base64, mime}`         |
//! | `/v1/asr`   | `{audio_base64, mime}`                                | `{transcript}`                 |
//!
//! A bearer token is sent when the endpoint names a credential variable.

use std::sync::Arc;
use std::time::{Duration, Instant};

use base64::engine::general_purpose::STANDARD as B64;
use base64::Engine as _;
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::{json, Value};

use super::retry::Attempt;
use super::{
    AudioResult, Capability, ConfigError, ImageProvider, ImageRequest, ImageResult, Layout,
    ProviderError, RemoteEndpoint, RetryPolicy, SpeechRecognizer, SpeechSynthesizer, TextProvider,
    TextRequest, TextResult,
};
use crate::assets::{AssetRef, AssetStore};

pub struct RemoteProvider {
    endpoint: RemoteEndpoint,
    token: Option<String>,
    policy: RetryPolicy,
    agent: ureq::Agent,
    assets: Arc<AssetStore>,
}

enum CallError {
    Timeout,
    Other(ProviderError),
}

impl RemoteProvider {
    pub fn new(
        endpoint: RemoteEndpoint,
        policy: RetryPolicy,
        assets: Arc<AssetStore>,
    ) -> Result<Self, ConfigError> {
        let token = match &endpoint.credential_env {
            Some(var) => Some(std::env::var(var).map_err(|_| {
                ConfigError::Invalid(format!("credential variable {var} is not set"))
            })?),
            None => None,
        };
        let agent = ureq::Agent::config_builder().http_status_as_error(false).build().into();
        Ok(Self { endpoint, token, policy, agent, assets })
    }

    fn call<T: DeserializeOwned>(
        &self,
        capability: Capability,
        path: &str,
        body: Value,
    ) -> Result<(T, u64), ProviderError> {
        let url = format!("{}{}", self.endpoint.url.trim_end_matches('/'), path);
        let payload = body.to_string();
        let started = Instant::now();
        let mut all_timeouts = true;
        let outcome = self.policy.run(|per_attempt| match self.attempt(&url, &payload, per_attempt) {
            Ok(text) => Attempt::Done(text),
            Err(CallError::Timeout) => Attempt::Retry(ProviderError::Timeout {
                capability,
                attempts: 0,
                timeout_ms: self.policy.timeout.as_millis() as u64,
            }),
            Err(CallError::Other(e)) => {
                all_timeouts = false;
                match &e {
                    ProviderError::Transport(_) => Attempt::Retry(e),
                    ProviderError::Remote { status, .. } if *status >= 500 => Attempt::Retry(e),
                    _ => Attempt::Fail(e),
                }
            }
        });
        let text = match outcome {
            Ok(text) => text,
            Err((ProviderError::Timeout { .. }, attempts)) if all_timeouts => {
                return Err(ProviderError::Timeout {
                    capability,
                    attempts,
                    timeout_ms: self.policy.timeout.as_millis() as u64,
                })
            }
            Err((e, _)) => return Err(e),
        };
        let parsed = serde_json::from_str(&text).map_err(|e| ProviderError::Payload(e.to_string()))?;
        Ok((parsed, started.elapsed().as_millis() as u64))
    }

    fn attempt(&self, url: &str, payload: &str, timeout: Duration) -> Result<String, CallError> {
        let mut request = self
            .agent
            .post(url)
            .config()
            .timeout_global(Some(timeout))
            .build()
            .header("Content-Type", "application/json");
        if let Some(token) = &self.token {
            request = request.header("Authorization", format!("Bearer {token}"));
        }
        let mut response = request.send(payload).map_err(classify)?;
        let status = response.status().as_u16();
        let text = response.body_mut().read_to_string().map_err(classify)?;
        if (200..300).contains(&status) {
            Ok(text)
        } else {
            Err(CallError::Other(ProviderError::Remote { status, message: text }))
        }
    }

    fn store(&self, data_base64: &str, mime: &str) -> Result<AssetRef, ProviderError> {
        let bytes = B64
            .decode(data_base64)
            .map_err(|e| ProviderError::Payload(format!("bad base64: {e}")))?;
        let ext = match mime {
            "image/png" => "png",
            "image/jpeg" => "jpg",
            "audio/wav" | "audio/x-wav" => "wav",
            "audio/mpeg" => "mp3",
            "audio/ogg" => "ogg",
            _ => "bin",
        };
        Ok(self.assets.put(&bytes, ext)?)
    }
}

fn classify(e: ureq::Error) -> CallError {
    match e {
        ureq::Error::Timeout(_) => CallError::Timeout,
        ureq::Error::Io(io) if io.kind() == std::io::ErrorKind::TimedOut => CallError::Timeout,
        other => CallError::Other(ProviderError::Transport(other.to_string())),
    }
}

#[derive(Deserialize)]
struct TextReply {
    text: String,
}

#[derive(Deserialize)]
struct ImageReply {
    image_base64: String,
    layout: Layout,
    #[serde(default = "png_mime")]
    mime: String,
}

fn png_mime() -> String {
    "image/png".into()
}

#[derive(Deserialize)]
struct AudioReply {
    audio_base64: String,
    mime: String,
}

#[derive(Deserialize)]
struct TranscriptReply {
    transcript: String,
}

impl TextProvider for RemoteProvider {
    fn generate_text(&self, req: &TextRequest) -> Result<TextResult, ProviderError> {
        let body = json!({ "role": req.role, "prompt": req.prompt, "context": req.context });
        let (reply, latency_ms): (TextReply, _) = self.call(Capability::Text, "/v1/text", body)?;
        if reply.text.trim().is_empty() {
            return Err(ProviderError::Payload("empty text result".into()));
        }
        Ok(TextResult { text: reply.text, latency_ms })
    }
}

impl ImageProvider for RemoteProvider {
    fn generate_image(&self, req: &ImageRequest) -> Result<ImageResult, ProviderError> {
        let mut references = Vec::new();
        for r in &req.reference_images {
            references.push(json!({ "path": r, "data_base64": B64.encode(self.assets.read(r)?) }));
        }
        let body = json!({
            "prompt": req.prompt,
            "layout": req.layout,
            "reference_images": references,
        });
        let (reply, latency_ms): (ImageReply, _) = self.call(Capability::Image, "/v1/image", body)?;
        let image = self.store(&reply.image_base64, &reply.mime)?;
        Ok(ImageResult { image, layout: reply.layout, latency_ms })
    }
}

impl SpeechSynthesizer for RemoteProvider {
    fn synthesize_speech(
        &self,
        text: &str,
        voice_profile: &str,
    ) -> Result<AudioResult, ProviderError> {
        let body = json!({ "text": text, "voice_profile": voice_profile });
        let (reply, latency_ms): (AudioReply, _) = self.call(Capability::Tts, "/v1/tts", body)?;
        let audio = self.store(&reply.audio_base64, &reply.mime)?;
        Ok(AudioResult { audio, mime: reply.mime, latency_ms })
    }
}

impl SpeechRecognizer for RemoteProvider {
    fn transcribe(&self, audio: &AssetRef) -> Result<String, ProviderError> {
        let mime = match audio.extension() {
            Some("wav") => "audio/wav",
            Some("mp3") => "audio/mpeg",
            Some("ogg") => "audio/ogg",
            Some("webm") => "audio/webm",
            other => {
                return Err(ProviderError::UnsupportedAudio(format!(
                    "extension {}",
                    other.unwrap_or("<none>")
                )))
            }
        };
        let body = json!({ "audio_base64": B64.encode(self.assets.read(audio)?), "mime": mime });
        let (reply, _): (TranscriptReply, _) = self.call(Capability::Asr, "/v1/asr", body)?;
        Ok(reply.transcript)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::provider::AgentRole;
    use std::io::{Read, Write};
    use std::net::TcpListener;
    use std::thread;

    fn provider(url: String, timeout_ms: u64, max_retries: u32) -> (RemoteProvider, tempfile::TempDir) {
        let dir = tempfile::tempdir().unwrap();
        let assets = Arc::new(AssetStore::open(dir.path()).unwrap());
        let policy = RetryPolicy {
            timeout: Duration::from_millis(timeout_ms),
            max_retries,
            initial_backoff: Duration::from_millis(250),
        };
        let endpoint = RemoteEndpoint { url, credential_env: None };
        (RemoteProvider::new(endpoint, policy, assets).unwrap(), dir)
    }

    #[test]
    fn hanging_backend_is_bounded_by_the_timeout_budget() {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        // Accept connections and never answer.
        thread::spawn(move || {
            let mut held = Vec::new();
            for stream in listener.incoming().flatten() {
                held.push(stream);
            }
        });
        let (remote, _dir) = provider(format!("http://{addr}"), 200, 2);
        let started = Instant::now();
        let err = remote.generate_text(&TextRequest::new(AgentRole::Question, "hi")).unwrap_err();
        let elapsed = started.elapsed();
        assert!(
            matches!(err, ProviderError::Timeout { capability: Capability::Text, .. }),
            "{err:?}"
        );
        // 200 ms × 3 attempts plus scheduling slack
        assert!(elapsed < Duration::from_millis(600 + 400), "{elapsed:?}");
    }

    #[test]
    fn speaks_the_json_contract() {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        let server = thread::spawn(move || {
            let (mut stream, _) = listener.accept().unwrap();
            let mut buf = vec![0u8; 8192];
            let mut seen = String::new();
            while !seen.contains("\"prompt\"") {
                let n = stream.read(&mut buf).unwrap();
                seen.push_str(&String::from_utf8_lossy(&buf[..n]));
            }
            let body = r#"{"text":"Once upon a time"}"#;
            write!(
                stream,
                "HTTP/1.1 200 OK\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{}",
                body.len(),
                body
            )
            .unwrap();
            seen
        });
        let (remote, _dir) = provider(format!("http://{addr}"), 2_000, 0);
        let req = TextRequest::new(AgentRole::Writing, "write").with("protagonist", "Bunny");
        let out = remote.generate_text(&req).unwrap();
        assert_eq!(out.text, "Once upon a time");
        let seen = server.join().unwrap();
        assert!(seen.starts_with("POST /v1/text"));
        assert!(seen.contains("\"role\":\"writing\""));
        assert!(seen.contains("\"label\":\"protagonist\""));
    }

    #[test]
    fn client_errors_are_not_retried() {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        let server = thread::spawn(move || {
            let mut count = 0;
            listener.set_nonblocking(false).unwrap();
            if let Ok((mut stream, _)) = listener.accept() {
                count += 1;
                let mut buf = [0u8; 4096];
                let _ = stream.read(&mut buf);
                let _ = write!(
                    stream,
                    "HTTP/1.1 400 Bad Request\r\nContent-Length: 3\r\nConnection: close\r\n\r\nbad"
                );
            }
            count
        });
        let (remote, _dir) = provider(format!("http://{addr}"), 2_000, 3);
        let err = remote.generate_text(&TextRequest::new(AgentRole::Outline, "x")).unwrap_err();
        assert!(matches!(err, ProviderError::Remote { status: 400, .. }), "{err:?}");
        assert_eq!(server.join().unwrap(), 1);
    }
}
