//! Endpoint configuration, loadable from a single JSON document.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use tpc_core::{Result, TpcError};
use tpc_store::StoreConfig;
use tpc_token::AuthorizationPolicy;

fn default_marker_period() -> f64 {
    5.0
}

fn default_pull_streams() -> u32 {
    4
}

fn default_max_active_copies() -> usize {
    8
}

fn default_remote_timeout() -> f64 {
    30.0
}

fn default_min_stripe_bytes() -> u64 {
    1024 * 1024
}

fn default_key_id() -> String {
    "primary".to_owned()
}

fn default_true() -> bool {
    true
}

/// Paths to PEM-encoded serving material. When absent the endpoint generates
/// an ephemeral self-signed certificate at startup.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TlsPaths {
    pub cert: PathBuf,
    pub key: PathBuf,
}

/// What the endpoint's *outbound* client trusts when acting as the active
/// party of a transfer.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct TrustSettings {
    /// Extra PEM root-certificate files added to the system roots.
    #[serde(default)]
    pub roots: Vec<PathBuf>,
    /// Accept any certificate. Test meshes only.
    #[serde(default)]
    pub insecure: bool,
}

/// Test-only failure injection on the data plane.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct FaultConfig {
    /// Probability that a data-plane GET/PUT answers 500.
    #[serde(default)]
    pub error_rate: f64,
    /// Serve GET headers plus a first chunk, then hang forever.
    #[serde(default)]
    pub stall_get: bool,
    /// Pace GET bodies at roughly this many bytes per second.
    #[serde(default)]
    pub throttle_bytes_per_sec: Option<u64>,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EndpointConfig {
    /// Advertised base URL. Derived from the bound address when absent.
    #[serde(default)]
    pub base_url: Option<String>,
    /// Listen address, e.g. `127.0.0.1:8443`; port 0 picks an ephemeral port.
    pub listen: String,
    #[serde(default)]
    pub store: StoreConfig,
    /// Secret for the HMAC chain of issued and verified tokens.
    pub token_root_key: String,
    #[serde(default = "default_key_id")]
    pub token_key_id: String,
    /// Alternate base URLs data traffic may be bounced to.
    #[serde(default)]
    pub redirect_pool: Vec<String>,
    /// Seconds between perf markers on COPY responses.
    #[serde(default = "default_marker_period")]
    pub marker_period: f64,
    /// Parallel streams for pull transfers (overridable per request).
    #[serde(default = "default_pull_streams")]
    pub pull_streams: u32,
    #[serde(default = "default_max_active_copies")]
    pub max_active_copies: usize,
    /// Seconds without remote progress before an active transfer fails.
    #[serde(default = "default_remote_timeout")]
    pub remote_timeout: f64,
    #[serde(default)]
    pub tls: Option<TlsPaths>,
    #[serde(default)]
    pub trust: TrustSettings,
    #[serde(default)]
    pub policy: AuthorizationPolicy,
    #[serde(default = "default_true")]
    pub enable_token_service: bool,
    #[serde(default)]
    pub enable_propfind: bool,
    #[serde(default = "default_true")]
    pub enable_copy: bool,
    /// Minimum bytes per stripe before a pull splits into ranges.
    #[serde(default = "default_min_stripe_bytes")]
    pub min_stripe_bytes: u64,
    #[serde(default)]
    pub fault_injection: Option<FaultConfig>,
}

impl EndpointConfig {
    /// A minimal in-memory config listening on an ephemeral loopback port.
    pub fn ephemeral(token_root_key: impl Into<String>) -> Self {
        Self {
            base_url: None,
            listen: "127.0.0.1:0".to_owned(),
            store: StoreConfig::default(),
            token_root_key: token_root_key.into(),
            token_key_id: default_key_id(),
            redirect_pool: Vec::new(),
            marker_period: default_marker_period(),
            pull_streams: default_pull_streams(),
            max_active_copies: default_max_active_copies(),
            remote_timeout: default_remote_timeout(),
            tls: None,
            trust: TrustSettings::default(),
            policy: AuthorizationPolicy::default(),
            enable_token_service: true,
            enable_propfind: false,
            enable_copy: true,
            min_stripe_bytes: default_min_stripe_bytes(),
            fault_injection: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.pull_streams < 1 {
            return Err(TpcError::bad_request("pull_streams must be at least 1"));
        }
        if self.marker_period <= 0.0 {
            return Err(TpcError::bad_request("marker_period must be positive"));
        }
        if self.max_active_copies < 1 {
            return Err(TpcError::bad_request("max_active_copies must be at least 1"));
        }
        if self.remote_timeout <= 0.0 {
            return Err(TpcError::bad_request("remote_timeout must be positive"));
        }
        if self.token_root_key.is_empty() {
            return Err(TpcError::bad_request("token_root_key must not be empty"));
        }
        self.listen
            .parse::<std::net::SocketAddr>()
            .map_err(|e| TpcError::bad_request(format!("listen address invalid: {e}")))?;
        if let Some(fault) = &self.fault_injection {
            if !(0.0..=1.0).contains(&fault.error_rate) {
                return Err(TpcError::bad_request(
                    "fault_injection.error_rate must be within [0, 1]",
                ));
            }
        }
        self.policy.validate()?;
        Ok(())
    }
}
