//! In-memory backend, the default for tests and in-process meshes.

use std::collections::HashMap;
use std::ops::Range;

use bytes::Bytes;
use parking_lot::RwLock;
use tpc_core::{Result, TpcError, VirtualPath};

use crate::record::ObjectRecord;
use crate::{check_object_path, sha256_digest, slice_range, unix_now, ListEntry, ObjectStore};

struct StoredObject {
    bytes: Bytes,
    record: ObjectRecord,
}

struct MemoryState {
    objects: HashMap<VirtualPath, StoredObject>,
    /// Highest generation ever used per path; survives deletes so a
    /// recreated object never reuses a generation.
    generation_floor: HashMap<VirtualPath, u64>,
    total_bytes: u64,
}

/// Object store holding everything in process memory.
pub struct MemoryStore {
    state: RwLock<MemoryState>,
    capacity: Option<u64>,
}

impl MemoryStore {
    pub fn new(capacity_bytes: Option<u64>) -> Self {
        Self {
            state: RwLock::new(MemoryState {
                objects: HashMap::new(),
                generation_floor: HashMap::new(),
                total_bytes: 0,
            }),
            capacity: capacity_bytes,
        }
    }
}

impl MemoryState {
    fn is_container(&self, path: &VirtualPath) -> bool {
        self.objects
            .keys()
            .any(|k| path.contains(k) && k != path)
    }

    fn has_object_ancestor(&self, path: &VirtualPath) -> bool {
        let mut cursor = path.parent();
        while let Some(p) = cursor {
            if self.objects.contains_key(&p) {
                return true;
            }
            cursor = p.parent();
        }
        false
    }
}

impl ObjectStore for MemoryStore {
    fn put(&self, path: &VirtualPath, content: Bytes, overwrite: bool) -> Result<ObjectRecord> {
        check_object_path(path)?;
        let sha256 = sha256_digest(&content);
        let size = content.len() as u64;

        let mut state = self.state.write();
        let existing_size = match state.objects.get(path) {
            Some(existing) => {
                if !overwrite {
                    return Err(TpcError::conflict(format!("{path} already exists")));
                }
                Some(existing.record.size)
            }
            None => None,
        };
        if existing_size.is_none() {
            if state.is_container(path) {
                return Err(TpcError::conflict(format!("{path} is a container")));
            }
            if state.has_object_ancestor(path) {
                return Err(TpcError::conflict(format!(
                    "an ancestor of {path} is an object"
                )));
            }
        }
        let prospective = state.total_bytes - existing_size.unwrap_or(0) + size;
        if let Some(capacity) = self.capacity {
            if prospective > capacity {
                return Err(TpcError::bad_request(format!(
                    "quota exceeded: {prospective} > {capacity} bytes"
                )));
            }
        }
        let generation = state
            .generation_floor
            .get(path)
            .copied()
            .unwrap_or(0)
            + 1;
        let record = ObjectRecord {
            path: path.clone(),
            size,
            sha256,
            created_at: unix_now(),
            generation,
        };
        state.generation_floor.insert(path.clone(), generation);
        state.objects.insert(
            path.clone(),
            StoredObject {
                bytes: content,
                record: record.clone(),
            },
        );
        state.total_bytes = prospective;
        Ok(record)
    }

    fn get(&self, path: &VirtualPath, range: Option<Range<u64>>) -> Result<(Bytes, ObjectRecord)> {
        let state = self.state.read();
        let stored = state
            .objects
            .get(path)
            .ok_or_else(|| TpcError::not_found(format!("{path} not found")))?;
        let bytes = slice_range(&stored.bytes, stored.record.size, range)?;
        Ok((bytes, stored.record.clone()))
    }

    fn delete(&self, path: &VirtualPath) -> Result<ObjectRecord> {
        let mut state = self.state.write();
        let stored = state
            .objects
            .remove(path)
            .ok_or_else(|| TpcError::not_found(format!("{path} not found")))?;
        state.total_bytes -= stored.record.size;
        Ok(stored.record)
    }

    fn stat(&self, path: &VirtualPath) -> Result<ObjectRecord> {
        let state = self.state.read();
        state
            .objects
            .get(path)
            .map(|s| s.record.clone())
            .ok_or_else(|| TpcError::not_found(format!("{path} not found")))
    }

    fn list(&self, path: &VirtualPath) -> Result<Vec<ListEntry>> {
        let state = self.state.read();
        if state.objects.contains_key(path) {
            return Err(TpcError::bad_request(format!(
                "{path} is an object, not a container"
            )));
        }
        let depth = path.depth();
        let mut containers: std::collections::BTreeSet<String> = Default::default();
        let mut objects: std::collections::BTreeMap<String, ObjectRecord> = Default::default();
        for (key, stored) in &state.objects {
            if !path.contains(key) || key == path {
                continue;
            }
            let name = key.segments()[depth].clone();
            if key.depth() == depth + 1 {
                objects.insert(name, stored.record.clone());
            } else {
                containers.insert(name);
            }
        }
        if containers.is_empty() && objects.is_empty() && !path.is_root() {
            return Err(TpcError::not_found(format!("{path} not found")));
        }
        let mut entries: Vec<ListEntry> = containers
            .into_iter()
            .map(|name| ListEntry {
                name,
                is_container: true,
                record: None,
            })
            .chain(objects.into_iter().map(|(name, record)| ListEntry {
                name,
                is_container: false,
                record: Some(record),
            }))
            .collect();
        entries.sort_by(|a, b| a.name.cmp(&b.name));
        Ok(entries)
    }

    fn total_bytes(&self) -> u64 {
        self.state.read().total_bytes
    }
}
