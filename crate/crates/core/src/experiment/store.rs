use std::fs;
use std::path::{Path, PathBuf};

use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const SCHEMA: &str = "v1";
pub const WORKDIR_ENV: &str = "LASSERRE_GAP_WORKDIR";

/// Hex SHA-256 of the compact JSON text (object keys are already sorted).
pub fn content_hash(v: &Value) -> String {
    let text = serde_json::to_string(v).expect("json value serializes");
    hex::encode(Sha256::digest(text.as_bytes()))
}

/// Content-addressed JSON files under one working directory.
#[derive(Clone, Debug)]
pub struct ArtifactStore {
    root: PathBuf,
}

impl ArtifactStore {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        ArtifactStore { root: root.into() }
    }

    /// `$LASSERRE_GAP_WORKDIR`, or the current directory.
    pub fn from_env() -> Self {
        Self::new(
            std::env::var_os(WORKDIR_ENV)
                .map(PathBuf::from)
                .unwrap_or_else(|| ".".into()),
        )
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// Wraps `body` with the schema and kind tags and writes `<kind>-<hash>.json`.
    /// Identical content always lands in the same file with the same bytes.
    pub fn put(&self, kind: &str, body: Value) -> Result<(PathBuf, Value)> {
        let mut obj = match body {
            Value::Object(o) => o,
            other => {
                let mut o = serde_json::Map::new();
                o.insert("body".into(), other);
                o
            }
        };
        obj.insert("schema".into(), SCHEMA.into());
        obj.insert("kind".into(), kind.into());
        let v = Value::Object(obj);
        let hash = content_hash(&v);
        fs::create_dir_all(&self.root)?;
        let path = self.root.join(format!("{kind}-{}.json", &hash[..16]));
        let mut text = serde_json::to_string_pretty(&v)?;
        text.push('\n');
        fs::write(&path, text)?;
        Ok((path, v))
    }

    /// Reads an artifact, checking the schema tag and, when given, the kind.
    pub fn get(&self, path: &Path, kind: Option<&str>) -> Result<Value> {
        let full = if path.is_absolute() || path.exists() {
            path.to_path_buf()
        } else {
            self.root.join(path)
        };
        if !full.exists() {
            return Err(Error::Provenance(format!(
                "missing artifact {}",
                full.display()
            )));
        }
        let v: Value = serde_json::from_str(&fs::read_to_string(&full)?)?;
        match v.get("schema").and_then(Value::as_str) {
            Some(SCHEMA) => {}
            other => {
                return Err(Error::Provenance(format!(
                    "{}: schema {:?}, expected {SCHEMA}",
                    full.display(),
                    other
                )))
            }
        }
        if let Some(k) = kind {
            if v.get("kind").and_then(Value::as_str) != Some(k) {
                return Err(Error::Provenance(format!(
                    "{}: not a {k} artifact",
                    full.display()
                )));
            }
        }
        Ok(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn scratch(name: &str) -> ArtifactStore {
        let dir =
            std::env::temp_dir().join(format!("lasserre-gap-store-{name}-{}", std::process::id()));
        let _ = fs::remove_dir_all(&dir);
        ArtifactStore::new(dir)
    }

    #[test]
    fn put_is_content_addressed() {
        let s = scratch("put");
        let (a, _) = s.put("instance", json!({"n": 3, "b": [1, 2]})).unwrap();
        let bytes = fs::read(&a).unwrap();
        let (b, v) = s.put("instance", json!({"b": [1, 2], "n": 3})).unwrap();
        assert_eq!(a, b);
        assert_eq!(fs::read(&b).unwrap(), bytes);
        assert_eq!(v["schema"], "v1");
        assert_eq!(s.get(&a, Some("instance")).unwrap(), v);
        assert!(s.get(&a, Some("gadget")).is_err());
        assert!(s.get(Path::new("nope.json"), None).is_err());
        let _ = fs::remove_dir_all(s.root());
    }

    #[test]
    fn schema_mismatch_is_rejected() {
        let s = scratch("schema");
        fs::create_dir_all(s.root()).unwrap();
        let p = s.root().join("old.json");
        fs::write(&p, r#"{"schema":"v0","kind":"instance"}"#).unwrap();
        assert!(matches!(s.get(&p, None), Err(Error::Provenance(_))));
        let _ = fs::remove_dir_all(s.root());
    }
}
