//! Normalized namespace paths: the unit of authorization and storage
//! addressing.
//!
//! A `VirtualPath` is always canonical: `.` and `..` are resolved against
//! root, duplicate slashes collapsed, and `..` may never escape root.
//! Authorization decisions compare paths segment-wise, never as raw text, so
//! a grant on `/data` does not leak onto `/database`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Result, TpcError};

/// A canonical absolute path in the storage namespace.
///
/// Comparison is case-sensitive and byte-wise after UTF-8 validation.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VirtualPath {
    segments: Vec<String>,
}

impl VirtualPath {
    /// The namespace root, `/`.
    pub fn root() -> Self {
        Self {
            segments: Vec::new(),
        }
    }

    /// Normalize a raw path string into its canonical form.
    ///
    /// `.` segments and empty segments (duplicate slashes) are dropped, `..`
    /// pops the previous segment, and a `..` that would ascend above root is
    /// rejected. Segments containing NUL are rejected.
    pub fn parse(raw: &str) -> Result<Self> {
        let mut segments: Vec<String> = Vec::new();
        for segment in raw.split('/') {
            match segment {
                "" | "." => {}
                ".." => {
                    if segments.pop().is_none() {
                        return Err(TpcError::bad_request(format!(
                            "path {raw:?} escapes above root"
                        )));
                    }
                }
                other => {
                    if other.contains('\0') {
                        return Err(TpcError::bad_request("path segment contains NUL"));
                    }
                    segments.push(other.to_owned());
                }
            }
        }
        Ok(Self { segments })
    }

    pub fn is_root(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn segments(&self) -> &[String] {
        &self.segments
    }

    pub fn depth(&self) -> usize {
        self.segments.len()
    }

    /// Final segment, or `None` for root.
    pub fn name(&self) -> Option<&str> {
        self.segments.last().map(String::as_str)
    }

    /// Parent path, or `None` for root.
    pub fn parent(&self) -> Option<VirtualPath> {
        if self.segments.is_empty() {
            return None;
        }
        Some(Self {
            segments: self.segments[..self.segments.len() - 1].to_vec(),
        })
    }

    /// Append one segment. The segment must be a plain name, not a path.
    pub fn join(&self, segment: &str) -> Result<VirtualPath> {
        if segment.is_empty()
            || segment == "."
            || segment == ".."
            || segment.contains('/')
            || segment.contains('\0')
        {
            return Err(TpcError::bad_request(format!(
                "invalid path segment {segment:?}"
            )));
        }
        let mut segments = self.segments.clone();
        segments.push(segment.to_owned());
        Ok(Self { segments })
    }

    /// Segment-wise containment: true iff `candidate` equals `self` or lies
    /// strictly below it. Root contains everything.
    pub fn contains(&self, candidate: &VirtualPath) -> bool {
        candidate.segments.len() >= self.segments.len()
            && candidate.segments[..self.segments.len()] == self.segments[..]
    }
}

impl fmt::Display for VirtualPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.segments.is_empty() {
            return f.write_str("/");
        }
        for segment in &self.segments {
            write!(f, "/{segment}")?;
        }
        Ok(())
    }
}

impl FromStr for VirtualPath {
    type Err = TpcError;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s)
    }
}

/// Decode percent-escapes once, before normalization.
///
/// Paths arrive inside URLs; this is the single decoding step applied at that
/// boundary. The decoded text must be valid UTF-8.
pub fn percent_decode_path(raw: &str) -> Result<String> {
    percent_encoding::percent_decode_str(raw)
        .decode_utf8()
        .map(|cow| cow.into_owned())
        .map_err(|_| TpcError::bad_request("percent-encoded path is not valid UTF-8"))
}
