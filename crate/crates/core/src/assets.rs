//! Content-addressed asset store.
//!
//! Assets live under `<root>/assets/` and are referenced by their relative
//! path (`assets/<digest>.<ext>`). Identical bytes always map to the same
//! reference.

use std::fmt;
use std::fs;
use std::io;
use std::path::{Component, Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const ASSET_DIR: &str = "assets";

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct AssetRef(String);

impl TryFrom<String> for AssetRef {
    type Error = AssetError;
    fn try_from(value: String) -> Result<Self, Self::Error> {
        AssetRef::parse(&value)
    }
}

impl From<AssetRef> for String {
    fn from(value: AssetRef) -> Self {
        value.0
    }
}

impl AssetRef {
    /// Accepts only relative paths below `assets/` without `..` components.
    pub fn parse(path: &str) -> Result<Self, AssetError> {
        let p = Path::new(path);
        let mut components = p.components();
        let first_ok = matches!(components.next(), Some(Component::Normal(c)) if c == ASSET_DIR);
        let rest_ok = components.clone().count() >= 1
            && components.all(|c| matches!(c, Component::Normal(_)));
        if first_ok && rest_ok && !path.contains('\\') {
            Ok(Self(path.to_string()))
        } else {
            Err(AssetError::InvalidRef(path.to_string()))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn extension(&self) -> Option<&str> {
        Path::new(&self.0).extension().and_then(|e| e.to_str())
    }
}

impl fmt::Display for AssetRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum AssetError {
    #[error("invalid asset reference {0:?}")]
    InvalidRef(String),
    #[error("asset {0} does not resolve")]
    Missing(AssetRef),
    #[error("asset I/O error: {0}")]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone)]
pub struct AssetStore {
    root: PathBuf,
}

impl AssetStore {
    pub fn open(root: impl Into<PathBuf>) -> Result<Self, AssetError> {
        let root = root.into();
        fs::create_dir_all(root.join(ASSET_DIR))?;
        Ok(Self { root })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn put(&self, bytes: &[u8], extension: &str) -> Result<AssetRef, AssetError> {
        let digest = hex::encode(Sha256::digest(bytes));
        let reference = AssetRef(format!("{ASSET_DIR}/{}.{extension}", &digest[..24]));
        let path = self.root.join(&reference.0);
        if !path.exists() {
            let tmp = path.with_extension(format!("{extension}.tmp"));
            fs::write(&tmp, bytes)?;
            fs::rename(&tmp, &path)?;
        }
        Ok(reference)
    }

    pub fn import(&self, source: &Path) -> Result<AssetRef, AssetError> {
        let bytes = fs::read(source)?;
        let ext = source.extension().and_then(|e| e.to_str()).unwrap_or("bin").to_ascii_lowercase();
        self.put(&bytes, &ext)
    }

    pub fn resolve(&self, reference: &AssetRef) -> Result<PathBuf, AssetError> {
        let path = self.root.join(&reference.0);
        if path.is_file() {
            Ok(path)
        } else {
            Err(AssetError::Missing(reference.clone()))
        }
    }

    pub fn contains(&self, reference: &AssetRef) -> bool {
        self.resolve(reference).is_ok()
    }

    pub fn read(&self, reference: &AssetRef) -> Result<Vec<u8>, AssetError> {
        Ok(fs::read(self.resolve(reference)?)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_bytes_share_a_reference() {
        let dir = tempfile::tempdir().unwrap();
        let store = AssetStore::open(dir.path()).unwrap();
        let a = store.put(b"hello", "txt").unwrap();
        let b = store.put(b"hello", "txt").unwrap();
        assert_eq!(a, b);
        assert!(a.as_str().starts_with("assets/"));
        assert_eq!(store.read(&a).unwrap(), b"hello");
    }

    #[test]
    fn rejects_escaping_references() {
        for bad in ["../x.png", "assets/../x.png", "/assets/x.png", "other/x.png", "assets"] {
            assert!(AssetRef::parse(bad).is_err(), "{bad}");
        }
        assert!(AssetRef::parse("assets/x.png").is_ok());
    }

    #[test]
    fn missing_asset_does_not_resolve() {
        let dir = tempfile::tempdir().unwrap();
        let store = AssetStore::open(dir.path()).unwrap();
        let missing = AssetRef::parse("assets/nope.png").unwrap();
        assert!(matches!(store.resolve(&missing), Err(AssetError::Missing(_))));
    }
}
