//! Token issuance against a client authorization policy.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use tpc_core::{Result, Scope, TpcError};

use crate::caveat::Caveat;
use crate::token::TransferToken;

fn default_lifetime() -> u64 {
    3600
}

fn default_max_lifetime() -> u64 {
    86400
}

/// One client's standing authorization: its secret and the maximal scopes it
/// may request.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClientPolicy {
    pub secret: String,
    /// Scope texts, e.g. `"DOWNLOAD:/data"`.
    pub grants: Vec<String>,
}

/// Maps client ids to their maximal grants, plus token lifetime bounds.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AuthorizationPolicy {
    #[serde(default)]
    pub clients: BTreeMap<String, ClientPolicy>,
    #[serde(default = "default_lifetime")]
    pub default_lifetime: u64,
    #[serde(default = "default_max_lifetime")]
    pub max_lifetime: u64,
}

impl Default for AuthorizationPolicy {
    fn default() -> Self {
        Self {
            clients: BTreeMap::new(),
            default_lifetime: default_lifetime(),
            max_lifetime: default_max_lifetime(),
        }
    }
}

impl AuthorizationPolicy {
    pub fn validate(&self) -> Result<()> {
        if self.default_lifetime > self.max_lifetime {
            return Err(TpcError::bad_request(format!(
                "default_lifetime {} exceeds max_lifetime {}",
                self.default_lifetime, self.max_lifetime
            )));
        }
        for (client, policy) in &self.clients {
            for grant in &policy.grants {
                grant.parse::<Scope>().map_err(|e| {
                    TpcError::bad_request(format!("bad grant {grant:?} for client {client}: {e}"))
                })?;
            }
        }
        Ok(())
    }

    /// Parsed grants for one client, or `None` for unknown clients.
    pub fn grants_for(&self, client_id: &str) -> Option<Vec<Scope>> {
        let policy = self.clients.get(client_id)?;
        Some(
            policy
                .grants
                .iter()
                .filter_map(|g| g.parse().ok())
                .collect(),
        )
    }

    /// Check an id/secret pair.
    pub fn authenticate(&self, client_id: &str, secret: &str) -> bool {
        self.clients
            .get(client_id)
            .is_some_and(|c| c.secret == secret)
    }
}

/// A client-credentials token request.
#[derive(Debug, Clone)]
pub struct TokenRequest {
    pub grant_type: String,
    pub requested_scopes: Vec<Scope>,
    pub client_id: String,
    pub lifetime_hint: Option<u64>,
}

/// The endpoint-side token mint: root key, key id, policy.
pub struct TokenIssuer {
    pub issuer_location: String,
    pub key_id: String,
    pub root_key: Vec<u8>,
    pub policy: AuthorizationPolicy,
}

impl TokenIssuer {
    /// Issue a token whose scope caveats are exactly the requested scopes.
    ///
    /// Every requested scope must be contained in some policy grant for the
    /// client; the expiry is `now + min(lifetime_hint or default, max)`.
    pub fn issue(&self, request: &TokenRequest, now: i64) -> Result<(TransferToken, u64)> {
        if request.grant_type != "client_credentials" {
            return Err(TpcError::bad_request(format!(
                "unsupported grant_type {:?}",
                request.grant_type
            )));
        }
        if request.requested_scopes.is_empty() {
            return Err(TpcError::bad_request("at least one scope is required"));
        }
        let grants = self
            .policy
            .grants_for(&request.client_id)
            .ok_or_else(|| TpcError::unauthorized(format!("unknown client {}", request.client_id)))?;
        for requested in &request.requested_scopes {
            if !grants.iter().any(|grant| grant.grants(requested)) {
                return Err(TpcError::forbidden(format!(
                    "scope {requested} exceeds the grants of client {}",
                    request.client_id
                )));
            }
        }
        let lifetime = request
            .lifetime_hint
            .unwrap_or(self.policy.default_lifetime)
            .min(self.policy.max_lifetime);
        let mut caveats: Vec<String> = request
            .requested_scopes
            .iter()
            .map(|scope| Caveat::Scope(scope.clone()).to_string())
            .collect();
        caveats.push(Caveat::before_unix(now + lifetime as i64).to_string());
        Ok((
            TransferToken::build(&self.root_key, &self.issuer_location, &self.key_id, caveats),
            lifetime,
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verify::{verify, VerifyFailure, VerifyOutcome};

    const NOW: i64 = 1700000000;

    fn issuer() -> TokenIssuer {
        let mut clients = BTreeMap::new();
        clients.insert(
            "alice".to_owned(),
            ClientPolicy {
                secret: "s3cret".to_owned(),
                grants: vec!["DOWNLOAD:/data".to_owned(), "UPLOAD:/staging".to_owned()],
            },
        );
        TokenIssuer {
            issuer_location: "https://ep:8443".to_owned(),
            key_id: "k1".to_owned(),
            root_key: b"issuer-test-key".to_vec(),
            policy: AuthorizationPolicy {
                clients,
                default_lifetime: 3600,
                max_lifetime: 86400,
            },
        }
    }

    fn request(scopes: &[&str]) -> TokenRequest {
        TokenRequest {
            grant_type: "client_credentials".to_owned(),
            requested_scopes: scopes.iter().map(|s| s.parse().unwrap()).collect(),
            client_id: "alice".to_owned(),
            lifetime_hint: None,
        }
    }

    #[test]
    fn issues_contained_scopes() {
        let issuer = issuer();
        let (token, expires_in) = issuer.issue(&request(&["DOWNLOAD:/data/run1"]), NOW).unwrap();
        assert_eq!(expires_in, 3600);
        assert_eq!(
            token.caveats(),
            &[
                "scope:DOWNLOAD:/data/run1".to_owned(),
                "before:2023-11-14T23:13:20Z".to_owned(),
            ]
        );
        let outcome = verify(
            &token.serialize(),
            b"issuer-test-key",
            NOW,
            &"DOWNLOAD:/data/run1/f".parse().unwrap(),
            "https://ep:8443",
        );
        assert_eq!(outcome, VerifyOutcome::Pass);
    }

    #[test]
    fn denies_activity_mismatch() {
        let err = issuer().issue(&request(&["UPLOAD:/data"]), NOW).unwrap_err();
        assert_eq!(err.kind, tpc_core::ErrorKind::Forbidden);
    }

    #[test]
    fn denies_textual_prefix_that_is_not_containment() {
        let err = issuer().issue(&request(&["DOWNLOAD:/database"]), NOW).unwrap_err();
        assert_eq!(err.kind, tpc_core::ErrorKind::Forbidden);
    }

    #[test]
    fn one_bad_scope_denies_the_whole_request() {
        let err = issuer()
            .issue(&request(&["DOWNLOAD:/data", "DOWNLOAD:/etc"]), NOW)
            .unwrap_err();
        assert_eq!(err.kind, tpc_core::ErrorKind::Forbidden);
    }

    #[test]
    fn lifetime_hint_is_clamped() {
        let issuer = issuer();
        let mut req = request(&["DOWNLOAD:/data"]);
        req.lifetime_hint = Some(10);
        assert_eq!(issuer.issue(&req, NOW).unwrap().1, 10);
        req.lifetime_hint = Some(1_000_000);
        assert_eq!(issuer.issue(&req, NOW).unwrap().1, 86400);
    }

    #[test]
    fn rejects_wrong_grant_type_and_empty_scopes() {
        let issuer = issuer();
        let mut req = request(&["DOWNLOAD:/data"]);
        req.grant_type = "authorization_code".to_owned();
        assert_eq!(
            issuer.issue(&req, NOW).unwrap_err().kind,
            tpc_core::ErrorKind::BadRequest
        );
        assert_eq!(
            issuer.issue(&request(&[]), NOW).unwrap_err().kind,
            tpc_core::ErrorKind::BadRequest
        );
    }

    #[test]
    fn unknown_client_is_unauthorized() {
        let mut req = request(&["DOWNLOAD:/data"]);
        req.client_id = "mallory".to_owned();
        assert_eq!(
            issuer().issue(&req, NOW).unwrap_err().kind,
            tpc_core::ErrorKind::Unauthorized
        );
    }

    #[test]
    fn expired_immediately_after_lifetime() {
        let issuer = issuer();
        let (token, _) = issuer.issue(&request(&["DOWNLOAD:/data"]), NOW).unwrap();
        let outcome = verify(
            &token.serialize(),
            b"issuer-test-key",
            NOW + 3600,
            &"DOWNLOAD:/data".parse().unwrap(),
            "https://ep:8443",
        );
        assert_eq!(outcome, VerifyOutcome::Fail(VerifyFailure::Expired));
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn path_strategy() -> impl Strategy<Value = String> {
            proptest::collection::vec("[a-z]{1,4}", 0..4)
                .prop_map(|parts| format!("/{}", parts.join("/")))
        }

        proptest! {
            /// Issuance containment: every scope in an issued token is
            /// contained in some grant of the requesting client.
            #[test]
            fn issued_scopes_are_contained_in_grants(
                grant_paths in proptest::collection::vec(path_strategy(), 1..4),
                request_paths in proptest::collection::vec(path_strategy(), 1..4),
            ) {
                let grants: Vec<Scope> = grant_paths
                    .iter()
                    .map(|p| format!("DOWNLOAD:{p}").parse().unwrap())
                    .collect();
                let mut clients = BTreeMap::new();
                clients.insert(
                    "c".to_owned(),
                    ClientPolicy {
                        secret: "s".to_owned(),
                        grants: grants.iter().map(|g| g.to_string()).collect(),
                    },
                );
                let issuer = TokenIssuer {
                    issuer_location: "https://ep".to_owned(),
                    key_id: "k".to_owned(),
                    root_key: b"prop-key".to_vec(),
                    policy: AuthorizationPolicy {
                        clients,
                        default_lifetime: 60,
                        max_lifetime: 60,
                    },
                };
                let requested: Vec<Scope> = request_paths
                    .iter()
                    .map(|p| format!("DOWNLOAD:{p}").parse().unwrap())
                    .collect();
                let req = TokenRequest {
                    grant_type: "client_credentials".to_owned(),
                    requested_scopes: requested.clone(),
                    client_id: "c".to_owned(),
                    lifetime_hint: None,
                };
                match issuer.issue(&req, NOW) {
                    Ok((token, _)) => {
                        for caveat in token.caveats() {
                            if let Some(scope_text) = caveat.strip_prefix("scope:") {
                                let scope: Scope = scope_text.parse().unwrap();
                                prop_assert!(grants.iter().any(|g| g.grants(&scope)));
                            }
                        }
                    }
                    Err(err) => {
                        prop_assert_eq!(err.kind, tpc_core::ErrorKind::Forbidden);
                        prop_assert!(requested
                            .iter()
                            .any(|r| !grants.iter().any(|g| g.grants(r))));
                    }
                }
            }
        }
    }
}
