//! Session event log file: a header line followed by one event per line.

use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::Path;

use serde_json::{json, Value};

use super::SessionEvent;
use crate::canon::{self, CanonError};

pub const LOG_DOCUMENT: &str = "session_log";

#[derive(Debug, thiserror::Error)]
pub enum LogError {
    #[error("session log I/O: {0}")]
    Io(#[from] std::io::Error),
    #[error("session log header: {0}")]
    Header(CanonError),
    #[error("session log line {line}: {source}")]
    Line { line: usize, source: serde_json::Error },
    #[error("session log encoding: {0}")]
    Encode(#[from] CanonError),
}

fn header() -> String {
    json!({ "document": LOG_DOCUMENT, "schema_version": canon::SCHEMA_VERSION }).to_string()
}

pub fn encode_log(events: &[SessionEvent]) -> Result<String, LogError> {
    let mut out = header();
    out.push('\n');
    for ev in events {
        out.push_str(&canon::to_line(ev)?);
        out.push('\n');
    }
    Ok(out)
}

/// Writes the whole log atomically.
pub fn write_log(path: &Path, events: &[SessionEvent]) -> Result<(), LogError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let tmp = path.with_extension("log.tmp");
    fs::write(&tmp, encode_log(events)?)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Appends one event, writing the header first if the file is new.
pub fn append_event(path: &Path, ev: &SessionEvent) -> Result<(), LogError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let fresh = !path.exists();
    let mut file = OpenOptions::new().create(true).append(true).open(path)?;
    let mut chunk = String::new();
    if fresh {
        chunk.push_str(&header());
        chunk.push('\n');
    }
    chunk.push_str(&canon::to_line(ev)?);
    chunk.push('\n');
    file.write_all(chunk.as_bytes())?;
    file.sync_data()?;
    Ok(())
}

pub fn decode_log(text: &str) -> Result<Vec<SessionEvent>, LogError> {
    let mut lines = text.lines();
    let head: Value = serde_json::from_str(lines.next().unwrap_or(""))
        .map_err(|e| LogError::Header(CanonError::Json(e)))?;
    canon::check_version(head.get("schema_version")).map_err(LogError::Header)?;
    if head.get("document").and_then(Value::as_str) != Some(LOG_DOCUMENT) {
        return Err(LogError::Header(CanonError::Kind {
            expected: LOG_DOCUMENT.into(),
            found: head.get("document").and_then(Value::as_str).map(str::to_string),
        }));
    }
    let mut events = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let ev = serde_json::from_str(line).map_err(|source| LogError::Line { line: i + 2, source })?;
        events.push(ev);
    }
    Ok(events)
}

pub fn read_log(path: &Path) -> Result<Vec<SessionEvent>, LogError> {
    decode_log(&fs::read_to_string(path)?)
}
