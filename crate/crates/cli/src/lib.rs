//! Command line and HTTP front ends for a modelgate library.

pub mod api;
pub mod cli;
pub mod error;
pub mod events;

pub use api::{router, AppState};
pub use error::ApiError;
pub use events::{ApiEvent, EventKind, EventLog};

/// Recorded as author or reviewer when none is given, on both the CLI and the API.
pub const DEFAULT_AUTHOR: &str = "modeler";

/// Port `serve` listens on unless told otherwise.
pub const DEFAULT_PORT: u16 = 7070;
