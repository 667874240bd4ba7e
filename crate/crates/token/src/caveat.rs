//! The caveat grammar.
//!
//! Exactly four forms exist:
//!
//! - `scope:UPLOAD:/path` — grants one activity under one path (repeatable)
//! - `before:2024-01-01T00:00:00Z` — expiry instant, RFC3339 UTC (repeatable)
//! - `audience:https://host:port` — binds the token to one endpoint
//! - `::group::` — delimits attenuation groups; inserted by attenuation, not
//!   written by callers
//!
//! Tokens carry caveats as raw strings (the HMAC chain covers the exact
//! bytes); this module gives them meaning.

use std::fmt;

use chrono::{DateTime, SecondsFormat, TimeZone, Utc};
use tpc_core::{Result, Scope, TpcError};

/// Sentinel caveat separating attenuation groups in the caveat list.
pub const GROUP_DELIMITER: &str = "::group::";

/// A parsed caveat.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Caveat {
    Scope(Scope),
    Before(DateTime<Utc>),
    Audience(String),
    GroupDelimiter,
}

impl Caveat {
    /// Parse a caveat string. Unknown forms are rejected: a verifier that
    /// cannot understand a caveat must not honor the token.
    pub fn parse(text: &str) -> Result<Caveat> {
        if text == GROUP_DELIMITER {
            return Ok(Caveat::GroupDelimiter);
        }
        if let Some(rest) = text.strip_prefix("scope:") {
            return Ok(Caveat::Scope(rest.parse()?));
        }
        if let Some(rest) = text.strip_prefix("before:") {
            let instant = DateTime::parse_from_rfc3339(rest)
                .map_err(|e| TpcError::bad_request(format!("bad before caveat {rest:?}: {e}")))?;
            return Ok(Caveat::Before(instant.with_timezone(&Utc)));
        }
        if let Some(rest) = text.strip_prefix("audience:") {
            return Ok(Caveat::Audience(rest.to_owned()));
        }
        Err(TpcError::bad_request(format!("unknown caveat {text:?}")))
    }

    /// Build a `before:` caveat from Unix seconds.
    pub fn before_unix(unix_seconds: i64) -> Caveat {
        Caveat::Before(Utc.timestamp_opt(unix_seconds, 0).single().expect("valid unix seconds"))
    }
}

impl fmt::Display for Caveat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Caveat::Scope(scope) => write!(f, "scope:{scope}"),
            Caveat::Before(instant) => write!(
                f,
                "before:{}",
                instant.to_rfc3339_opts(SecondsFormat::Secs, true)
            ),
            Caveat::Audience(url) => write!(f, "audience:{url}"),
            Caveat::GroupDelimiter => f.write_str(GROUP_DELIMITER),
        }
    }
}
