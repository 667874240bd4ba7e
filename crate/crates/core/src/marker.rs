//! The performance-marker stream: the body of every COPY response.
//!
//! The wire grammar is line-based and bit-exact. Zero or more marker blocks
//! are followed by exactly one terminal line, and nothing may follow the
//! terminal:
//!
//! ```text
//! Perf Marker
//!     Timestamp: 1700000000
//!     Stripe Index: 0
//!     Stripe Bytes Transferred: 1048576
//!     Total Stripe Count: 4
//! End
//! success: Created
//! ```
//!
//! A failed transfer ends with `failure: <single-line reason>` instead.
//! Render and parse are exact inverses; any deviation from the grammar is a
//! `PROTOCOL_VIOLATION`.

use std::fmt;

use crate::error::{Result, TpcError};

/// One progress record for one stripe of a running COPY.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PerfMarker {
    pub timestamp: i64,
    pub stripe_index: u32,
    pub stripe_bytes_transferred: u64,
    pub total_stripe_count: u32,
}

impl PerfMarker {
    pub fn new(
        timestamp: i64,
        stripe_index: u32,
        stripe_bytes_transferred: u64,
        total_stripe_count: u32,
    ) -> Result<Self> {
        if total_stripe_count == 0 {
            return Err(TpcError::protocol_violation(
                "total stripe count must be at least 1",
            ));
        }
        if stripe_index >= total_stripe_count {
            return Err(TpcError::protocol_violation(format!(
                "stripe index {stripe_index} out of range for {total_stripe_count} stripes"
            )));
        }
        Ok(Self {
            timestamp,
            stripe_index,
            stripe_bytes_transferred,
            total_stripe_count,
        })
    }
}

/// Render one marker block, byte-exact.
pub fn render_perf_marker(marker: &PerfMarker) -> String {
    format!(
        "Perf Marker\n    Timestamp: {}\n    Stripe Index: {}\n    Stripe Bytes Transferred: {}\n    Total Stripe Count: {}\nEnd\n",
        marker.timestamp,
        marker.stripe_index,
        marker.stripe_bytes_transferred,
        marker.total_stripe_count,
    )
}

/// The single line that ends every marker stream.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TransferTerminal {
    Success,
    Failure(String),
}

impl TransferTerminal {
    /// Build a failure terminal, flattening the reason onto one line.
    pub fn failure(reason: impl Into<String>) -> Self {
        let reason: String = reason.into();
        TransferTerminal::Failure(reason.replace(['\n', '\r'], " "))
    }

    pub fn is_success(&self) -> bool {
        matches!(self, TransferTerminal::Success)
    }

    pub fn render(&self) -> String {
        match self {
            TransferTerminal::Success => "success: Created\n".to_owned(),
            TransferTerminal::Failure(reason) => format!("failure: {reason}\n"),
        }
    }
}

impl fmt::Display for TransferTerminal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TransferTerminal::Success => f.write_str("success: Created"),
            TransferTerminal::Failure(reason) => write!(f, "failure: {reason}"),
        }
    }
}

/// One parsed element of a marker stream.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MarkerStreamEvent {
    Marker(PerfMarker),
    Terminal(TransferTerminal),
}

const FIELD_PREFIXES: [&str; 4] = [
    "    Timestamp: ",
    "    Stripe Index: ",
    "    Stripe Bytes Transferred: ",
    "    Total Stripe Count: ",
];

#[derive(Debug)]
enum ParserState {
    /// Between blocks; a marker header or a terminal line is expected.
    TopLevel,
    /// Inside a block; `fields` holds the values parsed so far.
    InBlock { fields: Vec<u64>, timestamp: Option<i64> },
    /// Terminal seen; any further input is trailing garbage.
    Done,
}

/// Incremental, chunk-at-a-time parser for a COPY response body.
///
/// Feed raw bytes as they arrive; complete lines are consumed eagerly so a
/// client can react to each marker without waiting for the stream to end.
#[derive(Debug)]
pub struct MarkerStreamParser {
    buffer: Vec<u8>,
    state: ParserState,
}

impl MarkerStreamParser {
    pub fn new() -> Self {
        Self {
            buffer: Vec::new(),
            state: ParserState::TopLevel,
        }
    }

    /// True once the terminal line has been consumed.
    pub fn is_done(&self) -> bool {
        matches!(self.state, ParserState::Done)
    }

    /// Consume a chunk and return every event completed by it.
    pub fn feed(&mut self, bytes: &[u8]) -> Result<Vec<MarkerStreamEvent>> {
        if self.is_done() && !bytes.is_empty() {
            return Err(TpcError::protocol_violation(
                "data after terminal line in marker stream",
            ));
        }
        self.buffer.extend_from_slice(bytes);
        let mut events = Vec::new();
        while let Some(newline) = self.buffer.iter().position(|&b| b == b'\n') {
            let line_bytes: Vec<u8> = self.buffer.drain(..=newline).collect();
            let line = std::str::from_utf8(&line_bytes[..line_bytes.len() - 1])
                .map_err(|_| TpcError::protocol_violation("marker stream is not UTF-8"))?;
            if let Some(event) = self.consume_line(line)? {
                events.push(event);
            }
        }
        if self.is_done() && !self.buffer.is_empty() {
            return Err(TpcError::protocol_violation(
                "data after terminal line in marker stream",
            ));
        }
        Ok(events)
    }

    /// Check that the stream ended cleanly: terminal seen, nothing buffered.
    pub fn finish(self) -> Result<()> {
        if !self.buffer.is_empty() {
            return Err(TpcError::protocol_violation(
                "marker stream ended mid-line",
            ));
        }
        match self.state {
            ParserState::Done => Ok(()),
            _ => Err(TpcError::protocol_violation(
                "marker stream ended without terminal line",
            )),
        }
    }

    fn consume_line(&mut self, line: &str) -> Result<Option<MarkerStreamEvent>> {
        match &mut self.state {
            ParserState::Done => Err(TpcError::protocol_violation(
                "data after terminal line in marker stream",
            )),
            ParserState::TopLevel => {
                if line == "Perf Marker" {
                    self.state = ParserState::InBlock {
                        fields: Vec::new(),
                        timestamp: None,
                    };
                    Ok(None)
                } else if line == "success: Created" {
                    self.state = ParserState::Done;
                    Ok(Some(MarkerStreamEvent::Terminal(TransferTerminal::Success)))
                } else if let Some(reason) = line.strip_prefix("failure: ") {
                    self.state = ParserState::Done;
                    Ok(Some(MarkerStreamEvent::Terminal(
                        TransferTerminal::Failure(reason.to_owned()),
                    )))
                } else {
                    Err(TpcError::protocol_violation(format!(
                        "unexpected line in marker stream: {line:?}"
                    )))
                }
            }
            ParserState::InBlock { fields, timestamp } => {
                let next_field = if timestamp.is_none() { 0 } else { fields.len() + 1 };
                if next_field < FIELD_PREFIXES.len() {
                    let prefix = FIELD_PREFIXES[next_field];
                    let value = line.strip_prefix(prefix).ok_or_else(|| {
                        TpcError::protocol_violation(format!(
                            "expected {prefix:?} line, got {line:?}"
                        ))
                    })?;
                    if next_field == 0 {
                        *timestamp = Some(value.parse::<i64>().map_err(|_| {
                            TpcError::protocol_violation(format!("bad timestamp {value:?}"))
                        })?);
                    } else {
                        fields.push(value.parse::<u64>().map_err(|_| {
                            TpcError::protocol_violation(format!("bad integer {value:?}"))
                        })?);
                    }
                    Ok(None)
                } else if line == "End" {
                    let marker = PerfMarker::new(
                        timestamp.expect("timestamp parsed before End"),
                        u32::try_from(fields[0]).map_err(|_| {
                            TpcError::protocol_violation("stripe index out of range")
                        })?,
                        fields[1],
                        u32::try_from(fields[2]).map_err(|_| {
                            TpcError::protocol_violation("stripe count out of range")
                        })?,
                    )?;
                    self.state = ParserState::TopLevel;
                    Ok(Some(MarkerStreamEvent::Marker(marker)))
                } else {
                    Err(TpcError::protocol_violation(format!(
                        "expected \"End\", got {line:?}"
                    )))
                }
            }
        }
    }
}

impl Default for MarkerStreamParser {
    fn default() -> Self {
        Self::new()
    }
}

/// Strict whole-body parse: zero or more markers, exactly one terminal,
/// nothing after it.
pub fn parse_perf_marker_stream(body: &[u8]) -> Result<(Vec<PerfMarker>, TransferTerminal)> {
    let mut parser = MarkerStreamParser::new();
    let events = parser.feed(body)?;
    parser.finish()?;
    let mut markers = Vec::new();
    let mut terminal = None;
    for event in events {
        match event {
            MarkerStreamEvent::Marker(m) => markers.push(m),
            MarkerStreamEvent::Terminal(t) => terminal = Some(t),
        }
    }
    let terminal = terminal
        .ok_or_else(|| TpcError::protocol_violation("marker stream ended without terminal"))?;
    Ok((markers, terminal))
}

/// True iff, for every stripe, byte counts never decrease across the trace.
pub fn per_stripe_non_decreasing(markers: &[PerfMarker]) -> bool {
    let mut last: std::collections::HashMap<u32, u64> = std::collections::HashMap::new();
    for marker in markers {
        let entry = last.entry(marker.stripe_index).or_insert(0);
        if marker.stripe_bytes_transferred < *entry {
            return false;
        }
        *entry = marker.stripe_bytes_transferred;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn render_is_bit_exact() {
        let marker = PerfMarker::new(1700000000, 0, 1048576, 1).unwrap();
        assert_eq!(
            render_perf_marker(&marker),
            "Perf Marker\n    Timestamp: 1700000000\n    Stripe Index: 0\n    Stripe Bytes Transferred: 1048576\n    Total Stripe Count: 1\nEnd\n"
        );
    }

    #[test]
    fn render_parse_round_trip() {
        let marker = PerfMarker::new(1700000000, 0, 1048576, 1).unwrap();
        let body = format!(
            "{}{}",
            render_perf_marker(&marker),
            TransferTerminal::Success.render()
        );
        let (markers, terminal) = parse_perf_marker_stream(body.as_bytes()).unwrap();
        assert_eq!(markers, vec![marker]);
        assert_eq!(terminal, TransferTerminal::Success);
    }

    #[test]
    fn minimal_success_body() {
        let (markers, terminal) = parse_perf_marker_stream(b"success: Created\n").unwrap();
        assert!(markers.is_empty());
        assert!(terminal.is_success());
    }

    #[test]
    fn failure_terminal_carries_reason() {
        let (_, terminal) =
            parse_perf_marker_stream(b"failure: REMOTE_FAILURE: remote returned 404\n").unwrap();
        assert_eq!(
            terminal,
            TransferTerminal::Failure("REMOTE_FAILURE: remote returned 404".to_owned())
        );
    }

    #[test]
    fn missing_terminal_is_violation() {
        let marker = PerfMarker::new(1, 0, 2, 1).unwrap();
        let body = render_perf_marker(&marker);
        let err = parse_perf_marker_stream(body.as_bytes()).unwrap_err();
        assert_eq!(err.kind, crate::ErrorKind::ProtocolViolation);
    }

    #[test]
    fn trailing_garbage_is_violation() {
        assert!(parse_perf_marker_stream(b"success: Created\nextra\n").is_err());
        assert!(parse_perf_marker_stream(b"success: Created\nx").is_err());
    }

    #[test]
    fn malformed_block_is_violation() {
        assert!(parse_perf_marker_stream(b"Perf Marker\nEnd\nsuccess: Created\n").is_err());
        assert!(parse_perf_marker_stream(
            b"Perf Marker\n    Timestamp: x\nsuccess: Created\n"
        )
        .is_err());
        // Tab instead of the four-space indent.
        assert!(parse_perf_marker_stream(
            b"Perf Marker\n\tTimestamp: 1\nsuccess: Created\n"
        )
        .is_err());
    }

    #[test]
    fn stripe_index_must_be_in_range() {
        let body = "Perf Marker\n    Timestamp: 1\n    Stripe Index: 2\n    Stripe Bytes Transferred: 0\n    Total Stripe Count: 2\nEnd\nsuccess: Created\n";
        assert!(parse_perf_marker_stream(body.as_bytes()).is_err());
    }

    #[test]
    fn incremental_parse_across_chunk_boundaries() {
        let marker = PerfMarker::new(42, 1, 7, 3).unwrap();
        let body = format!(
            "{}{}",
            render_perf_marker(&marker),
            TransferTerminal::failure("TIMEOUT: stalled").render()
        );
        let bytes = body.as_bytes();
        let mut parser = MarkerStreamParser::new();
        let mut events = Vec::new();
        // Feed one byte at a time to exercise every split point.
        for b in bytes {
            events.extend(parser.feed(std::slice::from_ref(b)).unwrap());
        }
        parser.finish().unwrap();
        assert_eq!(
            events,
            vec![
                MarkerStreamEvent::Marker(marker),
                MarkerStreamEvent::Terminal(TransferTerminal::Failure(
                    "TIMEOUT: stalled".to_owned()
                )),
            ]
        );
    }

    #[test]
    fn non_decreasing_check() {
        let mk = |i, b| PerfMarker::new(0, i, b, 4).unwrap();
        assert!(per_stripe_non_decreasing(&[mk(0, 1), mk(1, 5), mk(0, 2), mk(1, 5)]));
        assert!(!per_stripe_non_decreasing(&[mk(0, 3), mk(0, 2)]));
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn marker_strategy() -> impl Strategy<Value = PerfMarker> {
            (any::<i64>(), 1u32..16, any::<u64>()).prop_flat_map(|(ts, total, bytes)| {
                (0..total).prop_map(move |idx| PerfMarker::new(ts, idx, bytes, total).unwrap())
            })
        }

        proptest! {
            #[test]
            fn stream_round_trips(
                markers in proptest::collection::vec(marker_strategy(), 0..8),
                fail_reason in proptest::option::of("[ -~]{0,40}"),
            ) {
                let terminal = match fail_reason {
                    None => TransferTerminal::Success,
                    Some(reason) => TransferTerminal::failure(reason),
                };
                let mut body = String::new();
                for m in &markers {
                    body.push_str(&render_perf_marker(m));
                }
                body.push_str(&terminal.render());
                let (parsed, parsed_terminal) =
                    parse_perf_marker_stream(body.as_bytes()).unwrap();
                prop_assert_eq!(parsed, markers);
                prop_assert_eq!(parsed_terminal, terminal);
            }
        }
    }
}
