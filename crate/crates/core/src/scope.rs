//! Authorization scopes of the form `ACTIVITY:PATH`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Result, TpcError};
use crate::path::VirtualPath;

/// The five defined activities a token can authorize.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Activity {
    Upload,
    Download,
    Delete,
    Manage,
    List,
}

impl Activity {
    pub const ALL: [Activity; 5] = [
        Activity::Upload,
        Activity::Download,
        Activity::Delete,
        Activity::Manage,
        Activity::List,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Activity::Upload => "UPLOAD",
            Activity::Download => "DOWNLOAD",
            Activity::Delete => "DELETE",
            Activity::Manage => "MANAGE",
            Activity::List => "LIST",
        }
    }
}

impl fmt::Display for Activity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Activity {
    type Err = TpcError;

    /// Case-sensitive: only the uppercase names are valid.
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "UPLOAD" => Activity::Upload,
            "DOWNLOAD" => Activity::Download,
            "DELETE" => Activity::Delete,
            "MANAGE" => Activity::Manage,
            "LIST" => Activity::List,
            _ => return Err(TpcError::bad_request(format!("unknown activity {s:?}"))),
        })
    }
}

/// An authorization grant: one activity over everything inside one path.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Scope {
    activity: Activity,
    path: VirtualPath,
}

impl Scope {
    /// The scope grammar reserves `:` as the separator, so the path may not
    /// contain one.
    pub fn new(activity: Activity, path: VirtualPath) -> Result<Self> {
        if path.segments().iter().any(|s| s.contains(':')) {
            return Err(TpcError::bad_request(format!(
                "scope path {path} may not contain ':'"
            )));
        }
        Ok(Self { activity, path })
    }

    pub fn activity(&self) -> Activity {
        self.activity
    }

    pub fn path(&self) -> &VirtualPath {
        &self.path
    }

    /// True iff this scope grants `needed`: same activity, and `needed`'s
    /// path lies inside this scope's path.
    pub fn grants(&self, needed: &Scope) -> bool {
        self.activity == needed.activity && self.path.contains(&needed.path)
    }
}

impl fmt::Display for Scope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.activity, self.path)
    }
}

impl FromStr for Scope {
    type Err = TpcError;

    fn from_str(s: &str) -> Result<Self> {
        let (activity, path) = s
            .split_once(':')
            .ok_or_else(|| TpcError::bad_request(format!("scope {s:?} is missing ':'")))?;
        if path.contains(':') {
            return Err(TpcError::bad_request(format!(
                "scope path in {s:?} may not contain ':'"
            )));
        }
        Scope::new(activity.parse()?, VirtualPath::parse(path)?)
    }
}
