//! Error taxonomy shared by endpoints, clients, and the harness.
//!
//! The kinds are deliberately coarse: they are the stable classification the
//! transfer-matrix report keys on, not a dump of every underlying cause.

use std::fmt;
use std::str::FromStr;

/// Stable failure classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ErrorKind {
    BadRequest,
    Unauthorized,
    Forbidden,
    NotFound,
    Conflict,
    RemoteFailure,
    Timeout,
    Cancelled,
    ProtocolViolation,
}

impl ErrorKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ErrorKind::BadRequest => "BAD_REQUEST",
            ErrorKind::Unauthorized => "UNAUTHORIZED",
            ErrorKind::Forbidden => "FORBIDDEN",
            ErrorKind::NotFound => "NOT_FOUND",
            ErrorKind::Conflict => "CONFLICT",
            ErrorKind::RemoteFailure => "REMOTE_FAILURE",
            ErrorKind::Timeout => "TIMEOUT",
            ErrorKind::Cancelled => "CANCELLED",
            ErrorKind::ProtocolViolation => "PROTOCOL_VIOLATION",
        }
    }
}

impl fmt::Display for ErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ErrorKind {
    type Err = ();

    fn from_str(s: &str) -> std::result::Result<Self, ()> {
        Ok(match s {
            "BAD_REQUEST" => ErrorKind::BadRequest,
            "UNAUTHORIZED" => ErrorKind::Unauthorized,
            "FORBIDDEN" => ErrorKind::Forbidden,
            "NOT_FOUND" => ErrorKind::NotFound,
            "CONFLICT" => ErrorKind::Conflict,
            "REMOTE_FAILURE" => ErrorKind::RemoteFailure,
            "TIMEOUT" => ErrorKind::Timeout,
            "CANCELLED" => ErrorKind::Cancelled,
            "PROTOCOL_VIOLATION" => ErrorKind::ProtocolViolation,
            _ => return Err(()),
        })
    }
}

/// An error anywhere in the transfer stack.
///
/// `remote_status` is set when the failure was reported by the remote side of
/// a transfer as an HTTP status; a `RemoteFailure` always carries either that
/// status or a transport-level detail message.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TpcError {
    pub kind: ErrorKind,
    pub detail: String,
    pub remote_status: Option<u16>,
}

impl TpcError {
    pub fn new(kind: ErrorKind, detail: impl Into<String>) -> Self {
        Self {
            kind,
            detail: detail.into(),
            remote_status: None,
        }
    }

    pub fn bad_request(detail: impl Into<String>) -> Self {
        Self::new(ErrorKind::BadRequest, detail)
    }

    pub fn unauthorized(detail: impl Into<String>) -> Self {
        Self::new(ErrorKind::Unauthorized, detail)
    }

    pub fn forbidden(detail: impl Into<String>) -> Self {
        Self::new(ErrorKind::Forbidden, detail)
    }

    pub fn not_found(detail: impl Into<String>) -> Self {
        Self::new(ErrorKind::NotFound, detail)
    }

    pub fn conflict(detail: impl Into<String>) -> Self {
        Self::new(ErrorKind::Conflict, detail)
    }

    /// Remote failure with a transport-level detail but no HTTP status.
    pub fn remote_failure(detail: impl Into<String>) -> Self {
        Self::new(ErrorKind::RemoteFailure, detail)
    }

    /// Remote failure carrying the HTTP status the remote answered with.
    pub fn remote_status(status: u16, detail: impl Into<String>) -> Self {
        Self {
            kind: ErrorKind::RemoteFailure,
            detail: detail.into(),
            remote_status: Some(status),
        }
    }

    pub fn timeout(detail: impl Into<String>) -> Self {
        Self::new(ErrorKind::Timeout, detail)
    }

    pub fn cancelled(detail: impl Into<String>) -> Self {
        Self::new(ErrorKind::Cancelled, detail)
    }

    pub fn protocol_violation(detail: impl Into<String>) -> Self {
        Self::new(ErrorKind::ProtocolViolation, detail)
    }

    pub fn with_remote_status(mut self, status: u16) -> Self {
        self.remote_status = Some(status);
        self
    }
}

impl fmt::Display for TpcError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.remote_status {
            Some(status) => write!(f, "{}: {} (remote status {status})", self.kind, self.detail),
            None => write!(f, "{}: {}", self.kind, self.detail),
        }
    }
}

impl std::error::Error for TpcError {}

pub type Result<T> = std::result::Result<T, TpcError>;
