//! Bounded in-memory log of served requests, for harness assertions and
//! operational peeking.

use std::collections::VecDeque;

use parking_lot::Mutex;

const LOG_CAPACITY: usize = 4096;

/// The request fields transfer tests assert on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RequestLogEntry {
    pub method: String,
    /// Raw (still percent-encoded) request path.
    pub path: String,
    pub query: Option<String>,
    pub range: Option<String>,
    /// Bearer token presented, without the scheme prefix.
    pub bearer: Option<String>,
    pub source: Option<String>,
    pub destination: Option<String>,
}

#[derive(Default)]
pub struct RequestLog {
    entries: Mutex<VecDeque<RequestLogEntry>>,
}

impl RequestLog {
    pub fn record(&self, entry: RequestLogEntry) {
        let mut entries = self.entries.lock();
        if entries.len() == LOG_CAPACITY {
            entries.pop_front();
        }
        entries.push_back(entry);
    }

    pub fn snapshot(&self) -> Vec<RequestLogEntry> {
        self.entries.lock().iter().cloned().collect()
    }

    pub fn clear(&self) {
        self.entries.lock().clear();
    }
}
