//! Content-addressed on-disk response cache.
//!
//! Entries are keyed by `(endpoint, doi)`; the file name is the SHA-256 of
//! that pair. Reads are lock-free; writes go through a mutex and land via
//! write-then-rename, so readers only ever see complete entries.

use std::io;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::doi::NormalizedDoi;
use crate::fsutil::write_atomic;

#[derive(Debug)]
pub struct ResponseCache {
    root: PathBuf,
    write_lock: Mutex<()>,
}

#[derive(Serialize, Deserialize)]
struct Entry<T> {
    endpoint: String,
    doi: String,
    value: T,
}

impl ResponseCache {
    pub fn open(root: impl Into<PathBuf>) -> io::Result<Self> {
        let root = root.into();
        std::fs::create_dir_all(&root)?;
        Ok(ResponseCache {
            root,
            write_lock: Mutex::new(()),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn path_for(&self, endpoint: &str, doi: &NormalizedDoi) -> PathBuf {
        let mut h = Sha256::new();
        h.update(endpoint.as_bytes());
        h.update([0u8]);
        h.update(doi.as_str().as_bytes());
        let key = hex::encode(h.finalize());
        self.root.join(&key[..2]).join(format!("{}.json", &key[2..]))
    }

    pub fn get<T: DeserializeOwned>(&self, endpoint: &str, doi: &NormalizedDoi) -> Option<T> {
        let bytes = std::fs::read(self.path_for(endpoint, doi)).ok()?;
        let entry: Entry<T> = serde_json::from_slice(&bytes).ok()?;
        // guard against hash collisions and hand-edited files
        (entry.endpoint == endpoint && entry.doi == doi.as_str()).then_some(entry.value)
    }

    pub fn put<T: Serialize>(&self, endpoint: &str, doi: &NormalizedDoi, value: &T) -> io::Result<()> {
        let entry = Entry {
            endpoint: endpoint.to_owned(),
            doi: doi.as_str().to_owned(),
            value,
        };
        let bytes = serde_json::to_vec(&entry).map_err(io::Error::other)?;
        let _guard = self.write_lock.lock().unwrap_or_else(|p| p.into_inner());
        write_atomic(&self.path_for(endpoint, doi), &bytes)
    }
}
