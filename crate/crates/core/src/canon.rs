//! Canonical document encoding.
//!
//! Every persisted artifact (outlines, tasks, cassettes, templates, storybook
//! interchange files) is a UTF-8 JSON document with recursively key-sorted
//! objects and two envelope fields: `document` (the kind) and
//! `schema_version`. Event-log lines use the same ordering in compact form.

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

pub const SCHEMA_VERSION: u64 = 1;

#[derive(Debug, thiserror::Error)]
pub enum CanonError {
    #[error("invalid document: {0}")]
    Json(#[from] serde_json::Error),
    #[error("document is not an object")]
    NotAnObject,
    #[error("schema_version mismatch: expected {expected}, found {found:?}")]
    SchemaVersion { expected: u64, found: Option<u64> },
    #[error("document kind mismatch: expected {expected:?}, found {found:?}")]
    Kind { expected: String, found: Option<String> },
}

/// Returns `value` with every object's keys in sorted order.
pub fn canonicalize(value: Value) -> Value {
    match value {
        Value::Object(map) => {
            let mut entries: Vec<(String, Value)> = map.into_iter().collect();
            entries.sort_by(|a, b| a.0.cmp(&b.0));
            let mut out = Map::new();
            for (k, v) in entries {
                out.insert(k, canonicalize(v));
            }
            Value::Object(out)
        }
        Value::Array(items) => Value::Array(items.into_iter().map(canonicalize).collect()),
        other => other,
    }
}

fn envelope<T: Serialize>(kind: &str, value: &T) -> Result<Value, CanonError> {
    let mut obj = match serde_json::to_value(value)? {
        Value::Object(map) => map,
        _ => return Err(CanonError::NotAnObject),
    };
    obj.insert("document".into(), Value::String(kind.to_string()));
    obj.insert("schema_version".into(), Value::from(SCHEMA_VERSION));
    Ok(canonicalize(Value::Object(obj)))
}

/// Encodes `value` as a pretty-printed canonical document with a trailing newline.
pub fn to_document<T: Serialize>(kind: &str, value: &T) -> Result<String, CanonError> {
    let mut text = serde_json::to_string_pretty(&envelope(kind, value)?)?;
    text.push('\n');
    Ok(text)
}

/// Decodes a canonical document, checking its kind and schema version.
pub fn from_document<T: DeserializeOwned>(kind: &str, text: &str) -> Result<T, CanonError> {
    let value: Value = serde_json::from_str(text)?;
    let Value::Object(mut obj) = value else {
        return Err(CanonError::NotAnObject);
    };
    check_version(obj.get("schema_version"))?;
    let found = obj.remove("document").and_then(|v| v.as_str().map(str::to_string));
    if found.as_deref() != Some(kind) {
        return Err(CanonError::Kind { expected: kind.to_string(), found });
    }
    obj.remove("schema_version");
    Ok(serde_json::from_value(Value::Object(obj))?)
}

pub(crate) fn check_version(v: Option<&Value>) -> Result<(), CanonError> {
    match v.and_then(Value::as_u64) {
        Some(SCHEMA_VERSION) => Ok(()),
        found => Err(CanonError::SchemaVersion { expected: SCHEMA_VERSION, found }),
    }
}

/// Compact single-line canonical encoding (no envelope).
pub fn to_line<T: Serialize>(value: &T) -> Result<String, CanonError> {
    Ok(serde_json::to_string(&canonicalize(serde_json::to_value(value)?))?)
}

/// Pretty canonical encoding without envelope, for HTTP bodies.
pub fn to_pretty<T: Serialize>(value: &T) -> Result<String, CanonError> {
    Ok(serde_json::to_string_pretty(&canonicalize(serde_json::to_value(value)?))?)
}
