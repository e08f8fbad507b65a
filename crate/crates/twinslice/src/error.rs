//! Crate-wide error type.
//!
//! Every fallible operation in the crate returns [`Result`]. Variants are
//! deliberately specific: tests and callers match on them rather than on
//! message strings.

use thiserror::Error;

/// Convenience alias used across the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// All failure modes the simulator can report.
#[derive(Debug, Error)]
pub enum Error {
    /// A required configuration field is absent.
    #[error("missing field `{0}`")]
    MissingField(String),

    /// A configuration or argument value lies outside its legal range.
    #[error("`{field}` out of range: {detail}")]
    OutOfRange { field: String, detail: String },

    /// The slot length must evenly divide the window length.
    #[error("a {large_ts} s window is not a whole number of {small_ts} s slots")]
    InconsistentTimescales { small_ts: u32, large_ts: u32 },

    /// The bitrate ladder must be non-empty, positive and strictly increasing.
    #[error("bad bitrate ladder: {0}")]
    BadLadder(String),

    /// A multicast group must have at least one member.
    #[error("group {0} has no members")]
    EmptyGroup(usize),

    /// Every user must belong to exactly one group.
    #[error("user {0} is not assigned to any group")]
    UnassignedUser(usize),

    /// Twin observations must carry strictly increasing timestamps
    /// per attribute.
    #[error("non-monotonic timestamp for {attribute}: {got} after {last}")]
    NonMonotonicTimestamp {
        attribute: &'static str,
        last: f64,
        got: f64,
    },

    /// Not enough samples to fit the requested statistic.
    #[error("need at least {need} samples, got {got}")]
    TooFewSamples { need: usize, got: usize },

    /// A reservation or demand refers to a group that does not exist.
    #[error("unknown group {0}")]
    UnknownGroup(usize),

    /// An operation that needs users received none.
    #[error("no users")]
    NoUsers,

    /// A reservation call received an empty demand list.
    #[error("no demands")]
    EmptyDemands,

    /// The discretization step would produce an intractable grid.
    #[error("grid of {points} points per group exceeds the limit of {max}")]
    GridTooFine { points: usize, max: usize },

    /// A report lookup referenced a user that is not in the report.
    #[error("unknown user {0}")]
    UnknownUser(usize),

    /// Summary statistics need at least one successful metric row.
    #[error("no metric rows to summarize")]
    EmptyMetrics,

    /// The scenario file could not be parsed.
    #[error("scenario parse error: {0}")]
    Scenario(String),

    /// Filesystem failure while reading a scenario or writing outputs.
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
