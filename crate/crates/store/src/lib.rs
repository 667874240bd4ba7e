//! The storage backend behind each endpoint: a path-addressed object store
//! with atomic writes, SHA-256 digests, and listing.
//!
//! Two backends share one contract: [`MemoryStore`] for tests and in-process
//! meshes, [`DirectoryStore`] for harness runs that should survive the
//! process. Containers are implicit: a path is a container iff some object
//! lies strictly below it — there is no mkdir.

use std::ops::Range;
use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use bytes::Bytes;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use tpc_core::{Result, TpcError, VirtualPath};

mod directory;
mod memory;
mod record;

pub use directory::DirectoryStore;
pub use memory::MemoryStore;
pub use record::ObjectRecord;

/// Which backend a store runs on.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum StoreBackend {
    InMemory,
    Directory { root: std::path::PathBuf },
}

/// Store configuration: backend choice plus an optional byte quota.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StoreConfig {
    pub backend: StoreBackend,
    #[serde(default)]
    pub capacity_bytes: Option<u64>,
}

impl Default for StoreConfig {
    fn default() -> Self {
        Self {
            backend: StoreBackend::InMemory,
            capacity_bytes: None,
        }
    }
}

/// One entry returned by `list`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ListEntry {
    pub name: String,
    pub is_container: bool,
    pub record: Option<ObjectRecord>,
}

/// The store contract shared by all backends.
///
/// Writes to one path serialize; reads never block other reads. A `get`
/// racing a `put` observes either the old object in full or the new one,
/// never a mix.
pub trait ObjectStore: Send + Sync {
    /// Store `content` at `path` atomically.
    ///
    /// With `overwrite` false an existing object is left untouched and the
    /// call fails with `CONFLICT`.
    fn put(&self, path: &VirtualPath, content: Bytes, overwrite: bool) -> Result<ObjectRecord>;

    /// Read the object, or the `[start, end)` slice of it when a range is
    /// given.
    fn get(&self, path: &VirtualPath, range: Option<Range<u64>>) -> Result<(Bytes, ObjectRecord)>;

    /// Remove the object, returning its final record.
    fn delete(&self, path: &VirtualPath) -> Result<ObjectRecord>;

    fn stat(&self, path: &VirtualPath) -> Result<ObjectRecord>;

    /// Entries directly under a container path, sorted by name.
    fn list(&self, path: &VirtualPath) -> Result<Vec<ListEntry>>;

    /// Total stored payload bytes.
    fn total_bytes(&self) -> u64;
}

/// Open a store from configuration.
pub fn open_store(config: &StoreConfig) -> Result<Arc<dyn ObjectStore>> {
    Ok(match &config.backend {
        StoreBackend::InMemory => Arc::new(MemoryStore::new(config.capacity_bytes)),
        StoreBackend::Directory { root } => {
            Arc::new(DirectoryStore::open(root, config.capacity_bytes)?)
        }
    })
}

pub(crate) fn sha256_digest(content: &[u8]) -> [u8; 32] {
    let mut hasher = Sha256::new();
    hasher.update(content);
    hasher.finalize().into()
}

pub(crate) fn unix_now() -> i64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs() as i64)
        .unwrap_or(0)
}

/// Directory name reserved for the directory backend's temp files.
pub(crate) const STAGING_DIR: &str = ".staging";

pub(crate) fn check_object_path(path: &VirtualPath) -> Result<()> {
    if path.is_root() {
        return Err(TpcError::bad_request("the root path cannot hold an object"));
    }
    // `.meta` names are reserved for the directory backend's sidecar files
    // and `.staging` for its temp area; keep the namespace rule identical
    // across backends.
    if path.segments().iter().any(|s| s.ends_with(".meta")) {
        return Err(TpcError::bad_request(
            "path segments ending in .meta are reserved",
        ));
    }
    if path.segments().first().map(String::as_str) == Some(STAGING_DIR) {
        return Err(TpcError::bad_request("/.staging is reserved"));
    }
    Ok(())
}

pub(crate) fn slice_range(bytes: &Bytes, size: u64, range: Option<Range<u64>>) -> Result<Bytes> {
    match range {
        None => Ok(bytes.clone()),
        Some(range) => {
            if range.start >= range.end || range.end > size {
                return Err(TpcError::bad_request(format!(
                    "unsatisfiable range {}..{} for object of {size} bytes",
                    range.start, range.end
                )));
            }
            Ok(bytes.slice(range.start as usize..range.end as usize))
        }
    }
}
