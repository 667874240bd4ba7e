//! The token value: caveat list plus HMAC chain, and its wire encoding.

use base64::engine::general_purpose::URL_SAFE_NO_PAD;
use base64::Engine;
use hmac::{Hmac, Mac};
use serde::{Deserialize, Serialize};
use sha2::Sha256;
use tpc_core::{Result, TpcError};

use crate::caveat::{Caveat, GROUP_DELIMITER};

type HmacSha256 = Hmac<Sha256>;

/// An opaque bearer token: issuer location, key id, ordered caveats, and the
/// HMAC-SHA256 chain tag over all of them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransferToken {
    issuer_location: String,
    key_id: String,
    caveats: Vec<String>,
    signature: [u8; 32],
}

/// Wire form: `base64url(JSON {"l", "k", "c", "s"})`, one URL-safe line.
#[derive(Serialize, Deserialize)]
struct WireToken {
    l: String,
    k: String,
    c: Vec<String>,
    s: String,
}

fn hmac_step(key: &[u8], message: &[u8]) -> [u8; 32] {
    let mut mac = HmacSha256::new_from_slice(key).expect("HMAC accepts any key length");
    mac.update(message);
    mac.finalize().into_bytes().into()
}

/// Recompute the chain from the root key over a caveat list.
pub(crate) fn chain_signature(root_key: &[u8], key_id: &str, caveats: &[String]) -> [u8; 32] {
    let mut signature = hmac_step(root_key, key_id.as_bytes());
    for caveat in caveats {
        signature = hmac_step(&signature, caveat.as_bytes());
    }
    signature
}

impl TransferToken {
    /// Mint a token under the issuer's root key.
    pub fn build(
        root_key: &[u8],
        issuer_location: impl Into<String>,
        key_id: impl Into<String>,
        caveats: Vec<String>,
    ) -> Self {
        let issuer_location = issuer_location.into();
        let key_id = key_id.into();
        let signature = chain_signature(root_key, &key_id, &caveats);
        Self {
            issuer_location,
            key_id,
            caveats,
            signature,
        }
    }

    pub fn issuer_location(&self) -> &str {
        &self.issuer_location
    }

    pub fn key_id(&self) -> &str {
        &self.key_id
    }

    pub fn caveats(&self) -> &[String] {
        &self.caveats
    }

    pub fn signature(&self) -> &[u8; 32] {
        &self.signature
    }

    /// Derive a strictly weaker token by appending one caveat.
    ///
    /// The caveat opens a new attenuation group, so an appended scope narrows
    /// the authorized set (intersection across groups) rather than widening
    /// the current one. Only the current signature is needed — not the root
    /// key — and the previous signature cannot be recovered from the result.
    pub fn attenuate(&self, caveat: &str) -> Result<TransferToken> {
        self.attenuate_group(std::slice::from_ref(&caveat))
    }

    /// Append one attenuation group holding several caveats.
    pub fn attenuate_group<S: AsRef<str>>(&self, caveats: &[S]) -> Result<TransferToken> {
        if caveats.is_empty() {
            return Err(TpcError::bad_request("attenuation needs at least one caveat"));
        }
        for caveat in caveats {
            let caveat = caveat.as_ref();
            match Caveat::parse(caveat)? {
                Caveat::GroupDelimiter => {
                    return Err(TpcError::bad_request(
                        "the group delimiter is inserted by attenuation itself",
                    ))
                }
                _ => {}
            }
        }
        let mut next = self.clone();
        next.caveats.push(GROUP_DELIMITER.to_owned());
        next.signature = hmac_step(&next.signature, GROUP_DELIMITER.as_bytes());
        for caveat in caveats {
            let caveat = caveat.as_ref();
            next.caveats.push(caveat.to_owned());
            next.signature = hmac_step(&next.signature, caveat.as_bytes());
        }
        Ok(next)
    }

    /// Encode as a single URL-safe line.
    pub fn serialize(&self) -> String {
        let wire = WireToken {
            l: self.issuer_location.clone(),
            k: self.key_id.clone(),
            c: self.caveats.clone(),
            s: hex::encode(self.signature),
        };
        URL_SAFE_NO_PAD.encode(serde_json::to_string(&wire).expect("token serializes"))
    }

    /// Decode the wire form.
    pub fn parse(text: &str) -> Result<TransferToken> {
        let malformed = |detail: &str| TpcError::bad_request(format!("malformed token: {detail}"));
        let raw = URL_SAFE_NO_PAD
            .decode(text.trim())
            .map_err(|_| malformed("not base64url"))?;
        let wire: WireToken =
            serde_json::from_slice(&raw).map_err(|_| malformed("not a token document"))?;
        let signature = hex::decode(&wire.s)
            .ok()
            .and_then(|bytes| <[u8; 32]>::try_from(bytes).ok())
            .ok_or_else(|| malformed("bad signature encoding"))?;
        Ok(TransferToken {
            issuer_location: wire.l,
            key_id: wire.k,
            caveats: wire.c,
            signature,
        })
    }
}
