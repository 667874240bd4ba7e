//! Offline token verification.
//!
//! A token PASSes for a needed scope iff:
//!
//! 1. the HMAC chain recomputes exactly under the root key,
//! 2. every `before` caveat lies strictly in the future,
//! 3. every `audience` caveat names the verifying endpoint, and
//! 4. every attenuation group that carries scope caveats independently
//!    authorizes the needed scope. Scopes within one group are a union;
//!    groups combine by intersection, so attenuation can only shrink
//!    authority.

use std::fmt;

use tpc_core::{Scope, VirtualPath};

use crate::caveat::Caveat;
use crate::token::{chain_signature, TransferToken};

/// Machine-readable reason a verification failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerifyFailure {
    BadSignature,
    Expired,
    WrongAudience,
    ScopeDenied,
    Malformed,
}

impl VerifyFailure {
    pub fn as_str(self) -> &'static str {
        match self {
            VerifyFailure::BadSignature => "BAD_SIGNATURE",
            VerifyFailure::Expired => "EXPIRED",
            VerifyFailure::WrongAudience => "WRONG_AUDIENCE",
            VerifyFailure::ScopeDenied => "SCOPE_DENIED",
            VerifyFailure::Malformed => "MALFORMED",
        }
    }
}

impl fmt::Display for VerifyFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerifyOutcome {
    Pass,
    Fail(VerifyFailure),
}

impl VerifyOutcome {
    pub fn is_pass(self) -> bool {
        matches!(self, VerifyOutcome::Pass)
    }
}

/// What the bearer is trying to do.
enum Need<'a> {
    /// The named activity on the named path.
    Scope(&'a Scope),
    /// Metadata-only access: any activity whose path contains the resource.
    Stat(&'a VirtualPath),
}

fn constant_time_eq(a: &[u8; 32], b: &[u8; 32]) -> bool {
    a.iter().zip(b.iter()).fold(0u8, |acc, (x, y)| acc | (x ^ y)) == 0
}

/// Verify a serialized token for one needed scope.
pub fn verify(
    serialized: &str,
    root_key: &[u8],
    now: i64,
    needed: &Scope,
    audience: &str,
) -> VerifyOutcome {
    verify_need(serialized, root_key, now, Need::Scope(needed), audience)
}

/// Verify a serialized token for metadata access to one resource.
///
/// Any valid token whose scope paths contain the resource may stat it,
/// regardless of activity.
pub fn verify_stat(
    serialized: &str,
    root_key: &[u8],
    now: i64,
    path: &VirtualPath,
    audience: &str,
) -> VerifyOutcome {
    verify_need(serialized, root_key, now, Need::Stat(path), audience)
}

fn verify_need(
    serialized: &str,
    root_key: &[u8],
    now: i64,
    need: Need<'_>,
    audience: &str,
) -> VerifyOutcome {
    let token = match TransferToken::parse(serialized) {
        Ok(token) => token,
        Err(_) => return VerifyOutcome::Fail(VerifyFailure::Malformed),
    };
    let expected = chain_signature(root_key, token.key_id(), token.caveats());
    if !constant_time_eq(&expected, token.signature()) {
        return VerifyOutcome::Fail(VerifyFailure::BadSignature);
    }

    let mut caveats = Vec::with_capacity(token.caveats().len());
    for raw in token.caveats() {
        match Caveat::parse(raw) {
            Ok(caveat) => caveats.push(caveat),
            Err(_) => return VerifyOutcome::Fail(VerifyFailure::Malformed),
        }
    }
    let has_scope = caveats.iter().any(|c| matches!(c, Caveat::Scope(_)));
    let has_before = caveats.iter().any(|c| matches!(c, Caveat::Before(_)));
    if !has_scope || !has_before {
        return VerifyOutcome::Fail(VerifyFailure::Malformed);
    }

    for caveat in &caveats {
        match caveat {
            // Strict: a token is already invalid at its `before` instant.
            Caveat::Before(instant) if instant.timestamp() <= now => {
                return VerifyOutcome::Fail(VerifyFailure::Expired)
            }
            Caveat::Audience(bound) if bound != audience => {
                return VerifyOutcome::Fail(VerifyFailure::WrongAudience)
            }
            _ => {}
        }
    }

    for group in caveats.split(|c| matches!(c, Caveat::GroupDelimiter)) {
        let scopes: Vec<&Scope> = group
            .iter()
            .filter_map(|c| match c {
                Caveat::Scope(scope) => Some(scope),
                _ => None,
            })
            .collect();
        if scopes.is_empty() {
            // A group without scope caveats (say, a pure expiry tightening)
            // imposes no scope restriction.
            continue;
        }
        let authorized = match need {
            Need::Scope(needed) => scopes.iter().any(|s| s.grants(needed)),
            Need::Stat(path) => scopes.iter().any(|s| s.path().contains(path)),
        };
        if !authorized {
            return VerifyOutcome::Fail(VerifyFailure::ScopeDenied);
        }
    }
    VerifyOutcome::Pass
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::token::TransferToken;

    const KEY: &[u8] = b"verify-test-key";
    const AUDIENCE: &str = "https://ep:8443";
    const NOW: i64 = 1700000000;

    fn token_with(caveats: &[&str]) -> TransferToken {
        TransferToken::build(
            KEY,
            AUDIENCE,
            "k1",
            caveats.iter().map(|s| s.to_string()).collect(),
        )
    }

    fn scope(s: &str) -> Scope {
        s.parse().unwrap()
    }

    fn base_token() -> TransferToken {
        token_with(&["scope:DOWNLOAD:/data", "before:2030-01-01T00:00:00Z"])
    }

    #[test]
    fn pass_on_contained_scope() {
        let outcome = verify(
            &base_token().serialize(),
            KEY,
            NOW,
            &scope("DOWNLOAD:/data/f"),
            AUDIENCE,
        );
        assert_eq!(outcome, VerifyOutcome::Pass);
    }

    /// Re-encode a token with one signature byte flipped.
    fn with_flipped_signature_byte(token: &TransferToken, index: usize) -> String {
        use base64::engine::general_purpose::URL_SAFE_NO_PAD;
        use base64::Engine;
        let decoded = URL_SAFE_NO_PAD.decode(token.serialize()).unwrap();
        let mut doc: serde_json::Value = serde_json::from_slice(&decoded).unwrap();
        let mut sig = *token.signature();
        sig[index % 32] ^= 1 << (index % 8).max(1);
        doc["s"] = serde_json::Value::String(hex::encode(sig));
        URL_SAFE_NO_PAD.encode(serde_json::to_string(&doc).unwrap())
    }

    #[test]
    fn flipping_a_signature_byte_fails() {
        let corrupted = with_flipped_signature_byte(&base_token(), 7);
        assert_eq!(
            verify(&corrupted, KEY, NOW, &scope("DOWNLOAD:/data/f"), AUDIENCE),
            VerifyOutcome::Fail(VerifyFailure::BadSignature)
        );
    }

    #[test]
    fn wrong_root_key_fails() {
        assert_eq!(
            verify(
                &base_token().serialize(),
                b"other-key",
                NOW,
                &scope("DOWNLOAD:/data"),
                AUDIENCE
            ),
            VerifyOutcome::Fail(VerifyFailure::BadSignature)
        );
    }

    #[test]
    fn expiry_is_strict_at_the_boundary() {
        let token = token_with(&["scope:DOWNLOAD:/data", "before:2023-11-14T22:13:20Z"]);
        // 2023-11-14T22:13:20Z is exactly NOW.
        assert_eq!(
            verify(&token.serialize(), KEY, NOW, &scope("DOWNLOAD:/data"), AUDIENCE),
            VerifyOutcome::Fail(VerifyFailure::Expired)
        );
        assert_eq!(
            verify(&token.serialize(), KEY, NOW - 1, &scope("DOWNLOAD:/data"), AUDIENCE),
            VerifyOutcome::Pass
        );
    }

    #[test]
    fn audience_must_match() {
        let token = base_token().attenuate("audience:https://ep:8443").unwrap();
        assert!(verify(&token.serialize(), KEY, NOW, &scope("DOWNLOAD:/data"), AUDIENCE).is_pass());
        assert_eq!(
            verify(
                &token.serialize(),
                KEY,
                NOW,
                &scope("DOWNLOAD:/data"),
                "https://other:8443"
            ),
            VerifyOutcome::Fail(VerifyFailure::WrongAudience)
        );
    }

    #[test]
    fn attenuation_groups_intersect() {
        // Brute-force oracle over all (group scope, needed) pairs drawn from
        // the three paths, using an independent containment check on the raw
        // strings.
        let paths = ["/data", "/data/run1", "/data/run2"];
        let contains = |prefix: &str, candidate: &str| {
            // Independent segment-wise containment on raw text.
            let p: Vec<&str> = prefix.split('/').filter(|s| !s.is_empty()).collect();
            let c: Vec<&str> = candidate.split('/').filter(|s| !s.is_empty()).collect();
            c.len() >= p.len() && c[..p.len()] == p[..]
        };
        for issued in paths {
            for attenuated in paths {
                for needed in paths {
                    let token = token_with(&[
                        &format!("scope:DOWNLOAD:{issued}"),
                        "before:2030-01-01T00:00:00Z",
                    ])
                    .attenuate(&format!("scope:DOWNLOAD:{attenuated}"))
                    .unwrap();
                    let outcome = verify(
                        &token.serialize(),
                        KEY,
                        NOW,
                        &scope(&format!("DOWNLOAD:{needed}")),
                        AUDIENCE,
                    );
                    let expected = contains(issued, needed) && contains(attenuated, needed);
                    assert_eq!(
                        outcome.is_pass(),
                        expected,
                        "issued {issued}, attenuated {attenuated}, needed {needed}"
                    );
                }
            }
        }
    }

    #[test]
    fn scope_union_within_one_group() {
        let token = token_with(&[
            "scope:DOWNLOAD:/a",
            "scope:UPLOAD:/b",
            "before:2030-01-01T00:00:00Z",
        ]);
        let text = token.serialize();
        assert!(verify(&text, KEY, NOW, &scope("DOWNLOAD:/a/x"), AUDIENCE).is_pass());
        assert!(verify(&text, KEY, NOW, &scope("UPLOAD:/b/y"), AUDIENCE).is_pass());
        assert_eq!(
            verify(&text, KEY, NOW, &scope("UPLOAD:/a"), AUDIENCE),
            VerifyOutcome::Fail(VerifyFailure::ScopeDenied)
        );
    }

    #[test]
    fn scopeless_attenuation_group_restricts_nothing() {
        let token = base_token().attenuate("before:2029-01-01T00:00:00Z").unwrap();
        assert!(verify(&token.serialize(), KEY, NOW, &scope("DOWNLOAD:/data"), AUDIENCE).is_pass());
    }

    #[test]
    fn earlier_before_attenuation_expires_the_token() {
        let token = base_token().attenuate("before:2020-01-01T00:00:00Z").unwrap();
        assert_eq!(
            verify(&token.serialize(), KEY, NOW, &scope("DOWNLOAD:/data"), AUDIENCE),
            VerifyOutcome::Fail(VerifyFailure::Expired)
        );
    }

    #[test]
    fn tokens_without_scope_or_before_are_malformed() {
        let no_before = token_with(&["scope:DOWNLOAD:/data"]);
        assert_eq!(
            verify(&no_before.serialize(), KEY, NOW, &scope("DOWNLOAD:/data"), AUDIENCE),
            VerifyOutcome::Fail(VerifyFailure::Malformed)
        );
        let no_scope = token_with(&["before:2030-01-01T00:00:00Z"]);
        assert_eq!(
            verify(&no_scope.serialize(), KEY, NOW, &scope("DOWNLOAD:/data"), AUDIENCE),
            VerifyOutcome::Fail(VerifyFailure::Malformed)
        );
        assert_eq!(
            verify("not-a-token", KEY, NOW, &scope("DOWNLOAD:/data"), AUDIENCE),
            VerifyOutcome::Fail(VerifyFailure::Malformed)
        );
    }

    #[test]
    fn unknown_caveats_fail_closed() {
        let token = token_with(&[
            "scope:DOWNLOAD:/data",
            "before:2030-01-01T00:00:00Z",
            "mystery:whatever",
        ]);
        assert_eq!(
            verify(&token.serialize(), KEY, NOW, &scope("DOWNLOAD:/data"), AUDIENCE),
            VerifyOutcome::Fail(VerifyFailure::Malformed)
        );
    }

    #[test]
    fn stat_ignores_activity_but_not_path() {
        let text = base_token().serialize();
        let path = |s: &str| VirtualPath::parse(s).unwrap();
        assert!(verify_stat(&text, KEY, NOW, &path("/data/obj"), AUDIENCE).is_pass());
        assert_eq!(
            verify_stat(&text, KEY, NOW, &path("/elsewhere"), AUDIENCE),
            VerifyOutcome::Fail(VerifyFailure::ScopeDenied)
        );
    }
}
