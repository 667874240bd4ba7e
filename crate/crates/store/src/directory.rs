//! Directory-backed store: objects live at `<root>/<path>` with a JSON
//! sidecar at `<root>/<path>.meta`.
//!
//! Writes go to a temp name under `<root>/.staging` and are committed by
//! rename, so a committed object is never observable half-written. One
//! process owns a root at a time; readers and writers coordinate through an
//! in-process lock.

use std::collections::HashMap;
use std::fs;
use std::io::{Read, Seek, SeekFrom, Write};
use std::ops::Range;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};

use bytes::Bytes;
use parking_lot::RwLock;
use tpc_core::{Result, TpcError, VirtualPath};

use crate::record::{MetaDocument, ObjectRecord};
use crate::{check_object_path, sha256_digest, unix_now, ListEntry, ObjectStore, STAGING_DIR};

pub struct DirectoryStore {
    root: PathBuf,
    /// Guards all filesystem structure below `root`.
    lock: RwLock<DirState>,
    capacity: Option<u64>,
    temp_counter: AtomicU64,
}

struct DirState {
    generation_floor: HashMap<VirtualPath, u64>,
    total_bytes: u64,
}

impl DirectoryStore {
    pub fn open(root: impl AsRef<Path>, capacity_bytes: Option<u64>) -> Result<Self> {
        let root = root.as_ref().to_path_buf();
        fs::create_dir_all(root.join(STAGING_DIR)).map_err(io_error)?;
        // Drop temp files left behind by an earlier run.
        if let Ok(entries) = fs::read_dir(root.join(STAGING_DIR)) {
            for entry in entries.flatten() {
                let _ = fs::remove_file(entry.path());
            }
        }
        let total_bytes = scan_total(&root, &root)?;
        Ok(Self {
            root,
            lock: RwLock::new(DirState {
                generation_floor: HashMap::new(),
                total_bytes,
            }),
            capacity: capacity_bytes,
            temp_counter: AtomicU64::new(0),
        })
    }

    fn data_path(&self, path: &VirtualPath) -> PathBuf {
        let mut out = self.root.clone();
        for segment in path.segments() {
            out.push(segment);
        }
        out
    }

    fn meta_path(&self, path: &VirtualPath) -> PathBuf {
        let mut out = self.data_path(path);
        let name = format!(
            "{}.meta",
            out.file_name().map(|n| n.to_string_lossy()).unwrap_or_default()
        );
        out.set_file_name(name);
        out
    }

    fn temp_path(&self, tag: &str) -> PathBuf {
        let n = self.temp_counter.fetch_add(1, Ordering::Relaxed);
        self.root
            .join(STAGING_DIR)
            .join(format!("{tag}-{}-{n}", std::process::id()))
    }

    fn read_meta(&self, path: &VirtualPath) -> Result<ObjectRecord> {
        let raw = fs::read(self.meta_path(path))
            .map_err(|_| TpcError::not_found(format!("{path} not found")))?;
        let doc: MetaDocument = serde_json::from_slice(&raw)
            .map_err(|e| TpcError::bad_request(format!("corrupt sidecar for {path}: {e}")))?;
        doc.into_record(path.clone())
            .ok_or_else(|| TpcError::bad_request(format!("corrupt digest in sidecar for {path}")))
    }
}

impl ObjectStore for DirectoryStore {
    fn put(&self, path: &VirtualPath, content: Bytes, overwrite: bool) -> Result<ObjectRecord> {
        check_object_path(path)?;
        let sha256 = sha256_digest(&content);
        let size = content.len() as u64;

        // Stage the payload outside the lock; commit is two renames.
        let temp_data = self.temp_path("data");
        let mut file = fs::File::create(&temp_data).map_err(io_error)?;
        file.write_all(&content).map_err(io_error)?;
        file.sync_data().ok();
        drop(file);

        let mut state = self.lock.write();
        let data_path = self.data_path(path);
        let existing = match fs::metadata(&data_path) {
            Ok(meta) if meta.is_dir() => {
                let _ = fs::remove_file(&temp_data);
                return Err(TpcError::conflict(format!("{path} is a container")));
            }
            Ok(meta) => Some(meta.len()),
            Err(_) => None,
        };
        if existing.is_some() && !overwrite {
            let _ = fs::remove_file(&temp_data);
            return Err(TpcError::conflict(format!("{path} already exists")));
        }
        if existing.is_none() {
            // An ancestor that is a regular file blocks the implicit
            // container this object would need.
            let mut ancestor = path.parent();
            while let Some(p) = ancestor {
                if p.is_root() {
                    break;
                }
                if fs::metadata(self.data_path(&p)).is_ok_and(|m| m.is_file()) {
                    let _ = fs::remove_file(&temp_data);
                    return Err(TpcError::conflict(format!(
                        "an ancestor of {path} is an object"
                    )));
                }
                ancestor = p.parent();
            }
        }
        let prospective = state.total_bytes - existing.unwrap_or(0) + size;
        if let Some(capacity) = self.capacity {
            if prospective > capacity {
                let _ = fs::remove_file(&temp_data);
                return Err(TpcError::bad_request(format!(
                    "quota exceeded: {prospective} > {capacity} bytes"
                )));
            }
        }

        let floor = state.generation_floor.get(path).copied().unwrap_or(0);
        let prior = self.read_meta(path).map(|r| r.generation).unwrap_or(0);
        let generation = floor.max(prior) + 1;
        let record = ObjectRecord {
            path: path.clone(),
            size,
            sha256,
            created_at: unix_now(),
            generation,
        };

        if let Some(parent) = data_path.parent() {
            fs::create_dir_all(parent).map_err(io_error)?;
        }
        let temp_meta = self.temp_path("meta");
        fs::write(
            &temp_meta,
            serde_json::to_vec(&MetaDocument::from_record(&record)).expect("meta serializes"),
        )
        .map_err(io_error)?;
        fs::rename(&temp_data, &data_path).map_err(io_error)?;
        fs::rename(&temp_meta, self.meta_path(path)).map_err(io_error)?;

        state.generation_floor.insert(path.clone(), generation);
        state.total_bytes = prospective;
        Ok(record)
    }

    fn get(&self, path: &VirtualPath, range: Option<Range<u64>>) -> Result<(Bytes, ObjectRecord)> {
        let _guard = self.lock.read();
        let record = self.read_meta(path)?;
        let mut file = fs::File::open(self.data_path(path))
            .map_err(|_| TpcError::not_found(format!("{path} not found")))?;
        let bytes = match range {
            None => {
                let mut buf = Vec::with_capacity(record.size as usize);
                file.read_to_end(&mut buf).map_err(io_error)?;
                Bytes::from(buf)
            }
            Some(range) => {
                if range.start >= range.end || range.end > record.size {
                    return Err(TpcError::bad_request(format!(
                        "unsatisfiable range {}..{} for object of {} bytes",
                        range.start, range.end, record.size
                    )));
                }
                file.seek(SeekFrom::Start(range.start)).map_err(io_error)?;
                let mut buf = vec![0u8; (range.end - range.start) as usize];
                file.read_exact(&mut buf).map_err(io_error)?;
                Bytes::from(buf)
            }
        };
        Ok((bytes, record))
    }

    fn delete(&self, path: &VirtualPath) -> Result<ObjectRecord> {
        let mut state = self.lock.write();
        let record = self.read_meta(path)?;
        fs::remove_file(self.data_path(path))
            .map_err(|_| TpcError::not_found(format!("{path} not found")))?;
        let _ = fs::remove_file(self.meta_path(path));
        state.total_bytes -= record.size;
        state
            .generation_floor
            .insert(path.clone(), record.generation);
        // Implicit containers disappear with their last object.
        let mut cursor = path.parent();
        while let Some(p) = cursor {
            if p.is_root() {
                break;
            }
            if fs::remove_dir(self.data_path(&p)).is_err() {
                break;
            }
            cursor = p.parent();
        }
        Ok(record)
    }

    fn stat(&self, path: &VirtualPath) -> Result<ObjectRecord> {
        let _guard = self.lock.read();
        let record = self.read_meta(path)?;
        if !fs::metadata(self.data_path(path)).is_ok_and(|m| m.is_file()) {
            return Err(TpcError::not_found(format!("{path} not found")));
        }
        Ok(record)
    }

    fn list(&self, path: &VirtualPath) -> Result<Vec<ListEntry>> {
        let _guard = self.lock.read();
        let dir = self.data_path(path);
        match fs::metadata(&dir) {
            Ok(meta) if meta.is_file() => {
                return Err(TpcError::bad_request(format!(
                    "{path} is an object, not a container"
                )))
            }
            Ok(_) => {}
            Err(_) if path.is_root() => return Ok(Vec::new()),
            Err(_) => return Err(TpcError::not_found(format!("{path} not found"))),
        }
        let mut entries = Vec::new();
        for entry in fs::read_dir(&dir).map_err(io_error)? {
            let entry = entry.map_err(io_error)?;
            let name = entry.file_name().to_string_lossy().into_owned();
            if name.ends_with(".meta") || (path.is_root() && name == STAGING_DIR) {
                continue;
            }
            let kind = entry.file_type().map_err(io_error)?;
            if kind.is_dir() {
                entries.push(ListEntry {
                    name,
                    is_container: true,
                    record: None,
                });
            } else {
                let child = path.join(&name)?;
                entries.push(ListEntry {
                    record: Some(self.read_meta(&child)?),
                    name,
                    is_container: false,
                });
            }
        }
        entries.sort_by(|a, b| a.name.cmp(&b.name));
        Ok(entries)
    }

    fn total_bytes(&self) -> u64 {
        self.lock.read().total_bytes
    }
}

fn scan_total(root: &Path, dir: &Path) -> Result<u64> {
    let mut total = 0;
    let entries = match fs::read_dir(dir) {
        Ok(entries) => entries,
        Err(_) => return Ok(0),
    };
    for entry in entries {
        let entry = entry.map_err(io_error)?;
        let name = entry.file_name().to_string_lossy().into_owned();
        if dir == root && name == STAGING_DIR {
            continue;
        }
        let kind = entry.file_type().map_err(io_error)?;
        if kind.is_dir() {
            total += scan_total(root, &entry.path())?;
        } else if !name.ends_with(".meta") {
            total += entry.metadata().map_err(io_error)?.len();
        }
    }
    Ok(total)
}

fn io_error(err: std::io::Error) -> TpcError {
    TpcError::bad_request(format!("storage I/O error: {err}"))
}
