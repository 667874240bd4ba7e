//! Opaque bearer tokens for transfer authorization.
//!
//! A token is an ordered list of caveat strings bound by an HMAC-SHA256
//! chain: `sig_0 = HMAC(root_key, key_id)`, then each caveat extends the
//! chain with `sig_i = HMAC(sig_{i-1}, caveat_i)`. Anyone holding a token can
//! append caveats (attenuation) without talking to the issuer, but can never
//! remove one or recover an earlier signature, so derived tokens are always
//! weaker. Verification is offline: the endpoint recomputes the chain under
//! its root key and evaluates the caveats.
//!
//! Tokens are handed out by the token endpoint after an OAuth2
//! client-credentials request for scopes of the form `ACTIVITY:PATH`; see
//! [`issuer`] and [`http`].

pub mod caveat;
pub mod http;
pub mod issuer;
pub mod token;
pub mod verify;

pub use caveat::{Caveat, GROUP_DELIMITER};
pub use http::{discovery_document, TokenHttpRequest, TokenHttpResponse, DISCOVERY_PATH};
pub use issuer::{AuthorizationPolicy, ClientPolicy, TokenIssuer, TokenRequest};
pub use token::TransferToken;
pub use verify::{verify, verify_stat, VerifyFailure, VerifyOutcome};
