use std::path::PathBuf;

use thiserror::Error;

use crate::instance::Violation;

/// Errors surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// Matrix or vector shapes disagree with the declared arm/fidelity counts.
    #[error("structural error: {0}")]
    Structural(String),

    /// The instance parsed but breaks one or more model constraints.
    #[error("instance violates {} constraint(s): {}", .0.len(), join_violations(.0))]
    Invalid(Vec<Violation>),

    #[error("arm {arm} is indistinguishable at every fidelity (no positive gap)")]
    Indistinguishable { arm: usize },

    #[error("index out of range: {what} {index} (limit {limit})")]
    OutOfRange {
        what: &'static str,
        index: usize,
        limit: usize,
    },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("{path}: {source}")]
    Parse {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

fn join_violations(v: &[Violation]) -> String {
    v.iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}
