use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

/// Resource that ran out while repairing a genotype into a plan.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BindingResource {
    BusCapacity,
    TrzCapacity,
}

impl fmt::Display for BindingResource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BindingResource::BusCapacity => f.write_str("bus capacity"),
            BindingResource::TrzCapacity => f.write_str("grey-zone fleet capacity"),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid instance spec: field `{field}`: {reason}")]
    InvalidSpec { field: &'static str, reason: String },

    #[error("instance failed validation: {0}")]
    InvalidInstance(String),

    #[error("unknown node {0}")]
    UnknownNode(String),

    #[error("unknown vehicle {0}")]
    UnknownVehicle(String),

    #[error("{array} is not a permutation of 1..={expected_len}: {reason}")]
    NotAPermutation {
        array: &'static str,
        expected_len: usize,
        reason: String,
    },

    #[error("{what}: expected {expected}, got {actual}")]
    ShapeMismatch {
        what: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("entry station index {index} out of range 1..={n_entries}")]
    EntryOutOfRange { index: u32, n_entries: usize },

    #[error("genotype cannot be repaired into a feasible plan: {resource} exhausted")]
    Infeasible { resource: BindingResource },

    #[error("electric range violated on grey-zone route: {0}")]
    RangeViolation(String),

    #[error("invalid solver parameter `{field}`: {reason}")]
    InvalidParams { field: &'static str, reason: String },

    #[error("instance too large for exact enumeration: {0}")]
    TooLarge(String),

    #[error("solver failure: {0}")]
    Solver(String),

    #[error("empty Pareto front")]
    EmptyFront,

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("{path}: malformed front file: {reason}")]
    MalformedFront { path: PathBuf, reason: String },
}

impl Error {
    /// True for errors caused by bad user input rather than by a solve.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidSpec { .. }
                | Error::InvalidInstance(_)
                | Error::UnknownNode(_)
                | Error::UnknownVehicle(_)
                | Error::NotAPermutation { .. }
                | Error::ShapeMismatch { .. }
                | Error::EntryOutOfRange { .. }
                | Error::InvalidParams { .. }
                | Error::TooLarge(_)
                | Error::Json { .. }
                | Error::Csv { .. }
                | Error::MalformedFront { .. }
                | Error::EmptyFront
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
