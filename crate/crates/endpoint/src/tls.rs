//! TLS material: loaded from files or generated on the fly.
//!
//! Test meshes share one generated CA that signs a leaf per endpoint, so the
//! orchestrator and the endpoints' outbound clients can pin a single root.

use std::sync::Once;

use tpc_core::{Result, TpcError};

/// PEM-encoded leaf certificate and key an endpoint serves with.
#[derive(Debug, Clone)]
pub struct TlsMaterial {
    pub cert_pem: String,
    pub key_pem: String,
}

/// An in-memory certificate authority for loopback meshes.
pub struct MeshCa {
    cert: rcgen::Certificate,
    key: rcgen::KeyPair,
}

impl MeshCa {
    pub fn generate() -> Result<Self> {
        let mut params = rcgen::CertificateParams::new(Vec::new()).map_err(cert_error)?;
        params.is_ca = rcgen::IsCa::Ca(rcgen::BasicConstraints::Unconstrained);
        params
            .distinguished_name
            .push(rcgen::DnType::CommonName, "tpc mesh ca");
        let key = rcgen::KeyPair::generate().map_err(cert_error)?;
        let cert = params.self_signed(&key).map_err(cert_error)?;
        Ok(Self { cert, key })
    }

    pub fn cert_pem(&self) -> String {
        self.cert.pem()
    }

    /// Sign a leaf certificate for the given hostnames/addresses.
    pub fn issue_leaf(&self, hosts: &[String]) -> Result<TlsMaterial> {
        let params = rcgen::CertificateParams::new(hosts.to_vec()).map_err(cert_error)?;
        let key = rcgen::KeyPair::generate().map_err(cert_error)?;
        let cert = params.signed_by(&key, &self.cert, &self.key).map_err(cert_error)?;
        Ok(TlsMaterial {
            cert_pem: cert.pem(),
            key_pem: key.serialize_pem(),
        })
    }
}

/// Standalone self-signed certificate, for `serve` without TLS paths.
pub fn self_signed(hosts: &[String]) -> Result<TlsMaterial> {
    let params = rcgen::CertificateParams::new(hosts.to_vec()).map_err(cert_error)?;
    let key = rcgen::KeyPair::generate().map_err(cert_error)?;
    let cert = params.self_signed(&key).map_err(cert_error)?;
    Ok(TlsMaterial {
        cert_pem: cert.pem(),
        key_pem: key.serialize_pem(),
    })
}

fn cert_error(err: rcgen::Error) -> TpcError {
    TpcError::bad_request(format!("certificate generation failed: {err}"))
}

/// Pick the process-wide rustls crypto provider exactly once.
pub fn install_crypto_provider() {
    static INSTALL: Once = Once::new();
    INSTALL.call_once(|| {
        let _ = rustls::crypto::aws_lc_rs::default_provider().install_default();
    });
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mesh_ca_issues_parseable_leaves() {
        let ca = MeshCa::generate().unwrap();
        let leaf = ca
            .issue_leaf(&["127.0.0.1".to_owned(), "localhost".to_owned()])
            .unwrap();
        assert!(leaf.cert_pem.contains("BEGIN CERTIFICATE"));
        assert!(leaf.key_pem.contains("PRIVATE KEY"));
        assert!(ca.cert_pem().contains("BEGIN CERTIFICATE"));
    }
}
