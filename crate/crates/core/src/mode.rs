//! Transfer direction from the active endpoint's point of view.

use std::fmt;

/// Which side of a COPY moves the data.
///
/// `Pull` is signalled by a `Source` header on the COPY request (the active
/// endpoint is the destination); `Push` by a `Destination` header (the active
/// endpoint is the source). The two headers are mutually exclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TransferMode {
    Pull,
    Push,
}

impl TransferMode {
    pub fn as_str(self) -> &'static str {
        match self {
            TransferMode::Pull => "PULL",
            TransferMode::Push => "PUSH",
        }
    }
}

impl fmt::Display for TransferMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}
