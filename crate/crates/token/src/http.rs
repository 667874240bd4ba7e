//! Framework-agnostic HTTP surface of the token service: the OAuth2
//! discovery document and the token endpoint.
//!
//! The endpoint-service mounts these behind its router; keeping the logic
//! free of any HTTP framework makes it testable without sockets.

use base64::engine::general_purpose::STANDARD;
use base64::Engine;
use serde_json::{json, Value};
use tpc_core::{ErrorKind, Scope};

use crate::issuer::{TokenIssuer, TokenRequest};

/// Where the discovery document is served.
pub const DISCOVERY_PATH: &str = "/.well-known/oauth-authorization-server";

/// OAuth2 metadata document advertising this endpoint's token service.
pub fn discovery_document(endpoint_base: &str) -> Value {
    json!({
        "issuer": endpoint_base,
        "token_endpoint": format!("{endpoint_base}/token"),
        "grant_types_supported": ["client_credentials"],
    })
}

/// The parts of an HTTP request the token endpoint looks at.
#[derive(Debug, Clone)]
pub struct TokenHttpRequest {
    pub method: String,
    pub content_type: Option<String>,
    /// Raw `Authorization` header value, if any.
    pub authorization: Option<String>,
    pub body: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenHttpResponse {
    pub status: u16,
    pub body: Value,
}

fn oauth_error(status: u16, code: &str, description: impl Into<String>) -> TokenHttpResponse {
    TokenHttpResponse {
        status,
        body: json!({ "error": code, "error_description": description.into() }),
    }
}

/// Decode `Authorization: Basic base64(id:secret)`.
fn parse_basic(header: &str) -> Option<(String, String)> {
    let encoded = header.strip_prefix("Basic ").or_else(|| header.strip_prefix("basic "))?;
    let decoded = STANDARD.decode(encoded.trim()).ok()?;
    let text = String::from_utf8(decoded).ok()?;
    let (id, secret) = text.split_once(':')?;
    Some((id.to_owned(), secret.to_owned()))
}

impl TokenIssuer {
    /// Serve one `POST /token` request.
    ///
    /// Expects `application/x-www-form-urlencoded` with `grant_type` and
    /// `scope` (space-separated scope texts); clients authenticate with HTTP
    /// Basic over the TLS channel.
    pub fn handle_token_request(&self, request: &TokenHttpRequest, now: i64) -> TokenHttpResponse {
        if request.method != "POST" {
            return oauth_error(400, "invalid_request", "token requests must be POST");
        }
        let form_ok = request
            .content_type
            .as_deref()
            .map(|ct| ct.split(';').next().unwrap_or("").trim() == "application/x-www-form-urlencoded")
            .unwrap_or(false);
        if !form_ok {
            return oauth_error(
                400,
                "invalid_request",
                "content-type must be application/x-www-form-urlencoded",
            );
        }

        let (client_id, secret) = match request.authorization.as_deref().and_then(parse_basic) {
            Some(creds) => creds,
            None => return oauth_error(401, "invalid_client", "missing client authentication"),
        };
        if !self.policy.authenticate(&client_id, &secret) {
            return oauth_error(401, "invalid_client", "unknown client or bad secret");
        }

        let mut grant_type = None;
        let mut scope_field = None;
        let mut lifetime = None;
        for (key, value) in url::form_urlencoded::parse(&request.body) {
            match key.as_ref() {
                "grant_type" => grant_type = Some(value.into_owned()),
                "scope" => scope_field = Some(value.into_owned()),
                "lifetime" => lifetime = value.parse::<u64>().ok(),
                _ => {}
            }
        }
        let grant_type = match grant_type {
            Some(g) => g,
            None => return oauth_error(400, "invalid_request", "grant_type is required"),
        };
        if grant_type != "client_credentials" {
            return oauth_error(
                400,
                "unsupported_grant_type",
                format!("grant_type {grant_type:?} is not supported"),
            );
        }
        let mut scopes: Vec<Scope> = Vec::new();
        for text in scope_field.as_deref().unwrap_or("").split_whitespace() {
            match text.parse() {
                Ok(scope) => scopes.push(scope),
                Err(err) => return oauth_error(400, "invalid_scope", err.to_string()),
            }
        }

        let token_request = TokenRequest {
            grant_type,
            requested_scopes: scopes,
            client_id,
            lifetime_hint: lifetime,
        };
        match self.issue(&token_request, now) {
            Ok((token, expires_in)) => TokenHttpResponse {
                status: 200,
                body: json!({
                    "access_token": token.serialize(),
                    "token_type": "bearer",
                    "expires_in": expires_in,
                }),
            },
            Err(err) => match err.kind {
                ErrorKind::Forbidden => oauth_error(403, "access_denied", err.detail),
                ErrorKind::Unauthorized => oauth_error(401, "invalid_client", err.detail),
                _ => oauth_error(400, "invalid_request", err.detail),
            },
        }
    }
}
