//! Placeholder media written by the mock backends.
//!
//! Images are PNGs carrying `tEXt` metadata (layout tag and prompt digest).
//! Audio is 16-bit mono PCM WAV; speech markers carry the spoken text in a
//! private `twtx` RIFF chunk, silence markers carry none.

use std::io::Cursor;

use serde::{Deserialize, Serialize};

pub const LAYOUT_KEY: &str = "taleweave:layout";
pub const DIGEST_KEY: &str = "taleweave:digest";

pub const SINGLE_SIZE: u32 = 64;
pub const FOUR_PANEL_SIZE: u32 = 128;

const SAMPLE_RATE: u32 = 16_000;
const TEXT_CHUNK: &[u8; 4] = b"twtx";
const DIGEST_CHUNK: &[u8; 4] = b"twdg";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Layout {
    Single,
    FourPanel,
}

impl Layout {
    pub fn as_str(self) -> &'static str {
        match self {
            Layout::Single => "single",
            Layout::FourPanel => "four_panel",
        }
    }

    pub fn parse(text: &str) -> Option<Self> {
        match text {
            "single" => Some(Layout::Single),
            "four_panel" => Some(Layout::FourPanel),
            _ => None,
        }
    }

    pub fn size(self) -> u32 {
        match self {
            Layout::Single => SINGLE_SIZE,
            Layout::FourPanel => FOUR_PANEL_SIZE,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum MediaError {
    #[error("png encoding failed: {0}")]
    Encode(#[from] png::EncodingError),
    #[error("png decoding failed: {0}")]
    Decode(#[from] png::DecodingError),
    #[error("unsupported audio format: {0}")]
    UnsupportedAudio(String),
}

/// Solid-color placeholder; a four-panel image gets four differently colored
/// quadrants. Colors are taken from `digest` (hex).
pub fn placeholder_png(layout: Layout, digest: &str) -> Result<Vec<u8>, MediaError> {
    let size = layout.size();
    let bytes = hex::decode(digest).unwrap_or_else(|_| digest.as_bytes().to_vec());
    let color = |i: usize| -> [u8; 3] {
        let at = |j: usize| bytes.get((i * 3 + j) % bytes.len().max(1)).copied().unwrap_or(128);
        [at(0), at(1), at(2)]
    };
    let half = size / 2;
    let mut data = Vec::with_capacity((size * size * 3) as usize);
    for y in 0..size {
        for x in 0..size {
            let quadrant = match layout {
                Layout::Single => 0,
                Layout::FourPanel => usize::from(y >= half) * 2 + usize::from(x >= half),
            };
            data.extend_from_slice(&color(quadrant));
        }
    }

    let mut out = Vec::new();
    {
        let mut encoder = png::Encoder::new(&mut out, size, size);
        encoder.set_color(png::ColorType::Rgb);
        encoder.set_depth(png::BitDepth::Eight);
        encoder.add_text_chunk(LAYOUT_KEY.to_string(), layout.as_str().to_string())?;
        encoder.add_text_chunk(DIGEST_KEY.to_string(), digest.to_string())?;
        let mut writer = encoder.write_header()?;
        writer.write_image_data(&data)?;
        writer.finish()?;
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PngInfo {
    pub width: u32,
    pub height: u32,
    pub layout: Option<Layout>,
    pub digest: Option<String>,
}

pub fn read_png_info(bytes: &[u8]) -> Result<PngInfo, MediaError> {
    let decoder = png::Decoder::new(Cursor::new(bytes));
    let reader = decoder.read_info()?;
    let info = reader.info();
    let text = |key: &str| {
        info.uncompressed_latin1_text.iter().find(|c| c.keyword == key).map(|c| c.text.clone())
    };
    Ok(PngInfo {
        width: info.width,
        height: info.height,
        layout: text(LAYOUT_KEY).as_deref().and_then(Layout::parse),
        digest: text(DIGEST_KEY),
    })
}

fn push_chunk(out: &mut Vec<u8>, id: &[u8; 4], body: &[u8]) {
    out.extend_from_slice(id);
    out.extend_from_slice(&(body.len() as u32).to_le_bytes());
    out.extend_from_slice(body);
    if body.len() % 2 == 1 {
        out.push(0);
    }
}

fn wav(marker: Option<(&str, &str)>, millis: u32) -> Vec<u8> {
    let mut body = Vec::new();
    body.extend_from_slice(b"WAVE");
    let mut fmt = Vec::with_capacity(16);
    fmt.extend_from_slice(&1u16.to_le_bytes()); // PCM
    fmt.extend_from_slice(&1u16.to_le_bytes()); // mono
    fmt.extend_from_slice(&SAMPLE_RATE.to_le_bytes());
    fmt.extend_from_slice(&(SAMPLE_RATE * 2).to_le_bytes());
    fmt.extend_from_slice(&2u16.to_le_bytes());
    fmt.extend_from_slice(&16u16.to_le_bytes());
    push_chunk(&mut body, b"fmt ", &fmt);
    if let Some((text, digest)) = marker {
        push_chunk(&mut body, TEXT_CHUNK, text.as_bytes());
        push_chunk(&mut body, DIGEST_CHUNK, digest.as_bytes());
    }
    let samples = (SAMPLE_RATE / 1000 * millis) as usize;
    push_chunk(&mut body, b"data", &vec![0u8; samples * 2]);

    let mut out = Vec::with_capacity(body.len() + 8);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&(body.len() as u32).to_le_bytes());
    out.extend_from_slice(&body);
    out
}

/// WAV whose marker chunk carries `text`; the mock recognizer returns it verbatim.
pub fn speech_marker_wav(text: &str, digest: &str) -> Vec<u8> {
    wav(Some((text, digest)), 200)
}

/// WAV with no marker chunk; transcribes to an empty string.
pub fn silence_wav(millis: u32) -> Vec<u8> {
    wav(None, millis)
}

/// Extracts the marker text, `None` for plain (silent) audio.
pub fn read_wav_marker(bytes: &[u8]) -> Result<Option<String>, MediaError> {
    if bytes.len() < 12 || &bytes[0..4] != b"RIFF" || &bytes[8..12] != b"WAVE" {
        return Err(MediaError::UnsupportedAudio("expected a RIFF/WAVE file".into()));
    }
    let mut at = 12;
    let mut saw_fmt = false;
    while at + 8 <= bytes.len() {
        let id = &bytes[at..at + 4];
        let len = u32::from_le_bytes(bytes[at + 4..at + 8].try_into().expect("4 bytes")) as usize;
        let start = at + 8;
        let end = start.checked_add(len).filter(|&e| e <= bytes.len()).ok_or_else(|| {
            MediaError::UnsupportedAudio("truncated chunk".into())
        })?;
        if id == b"fmt " {
            if len < 16 || u16::from_le_bytes([bytes[start], bytes[start + 1]]) != 1 {
                return Err(MediaError::UnsupportedAudio("only PCM WAV is supported".into()));
            }
            saw_fmt = true;
        } else if id == TEXT_CHUNK {
            let text = String::from_utf8(bytes[start..end].to_vec())
                .map_err(|_| MediaError::UnsupportedAudio("marker is not UTF-8".into()))?;
            return Ok(Some(text));
        }
        at = end + (len % 2);
    }
    if saw_fmt {
        Ok(None)
    } else {
        Err(MediaError::UnsupportedAudio("missing fmt chunk".into()))
    }
}
