//! Metadata recorded for every stored object.

use serde::{Deserialize, Serialize};
use tpc_core::VirtualPath;

/// What the store knows about one object.
///
/// `generation` increases strictly on each successful overwrite of the same
/// path, so readers can detect which version of an object they saw.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObjectRecord {
    pub path: VirtualPath,
    pub size: u64,
    pub sha256: [u8; 32],
    pub created_at: i64,
    pub generation: u64,
}

impl ObjectRecord {
    /// Lowercase-hex text form of the digest.
    pub fn sha256_hex(&self) -> String {
        hex::encode(self.sha256)
    }
}

/// Sidecar/meta representation: `{size, sha256, created_at, generation}`.
#[derive(Debug, Serialize, Deserialize)]
pub(crate) struct MetaDocument {
    pub size: u64,
    pub sha256: String,
    pub created_at: i64,
    pub generation: u64,
}

impl MetaDocument {
    pub(crate) fn from_record(record: &ObjectRecord) -> Self {
        Self {
            size: record.size,
            sha256: record.sha256_hex(),
            created_at: record.created_at,
            generation: record.generation,
        }
    }

    pub(crate) fn into_record(self, path: VirtualPath) -> Option<ObjectRecord> {
        let digest = hex::decode(&self.sha256).ok()?;
        Some(ObjectRecord {
            path,
            size: self.size,
            sha256: digest.try_into().ok()?,
            created_at: self.created_at,
            generation: self.generation,
        })
    }
}
