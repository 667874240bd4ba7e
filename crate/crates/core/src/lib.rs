//! Shared vocabulary for HTTP third-party-copy endpoints, clients, and test
//! harnesses.
//!
//! Everything in this crate is an immutable value type with a bit-exact
//! textual encoding: namespace paths, `ACTIVITY:PATH` authorization scopes,
//! transfer modes, the performance-marker stream grammar used in COPY
//! response bodies, and the error taxonomy shared by every component.

pub mod error;
pub mod marker;
pub mod mode;
pub mod path;
pub mod scope;

pub use error::{ErrorKind, Result, TpcError};
pub use marker::{
    parse_perf_marker_stream, render_perf_marker, MarkerStreamEvent, MarkerStreamParser,
    PerfMarker, TransferTerminal,
};
pub use mode::TransferMode;
pub use path::{percent_decode_path, VirtualPath};
pub use scope::{Activity, Scope};
