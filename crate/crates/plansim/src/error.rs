//! Crate-wide error type.

use thiserror::Error;

use crate::plan::Violation;

/// Errors produced by graph construction, plan I/O, matching, and chain steps.
#[derive(Debug, Error)]
pub enum Error {
    // -- graph construction --
    #[error("graph has no precincts")]
    EmptyGraph,
    #[error("duplicate precinct id {id:?}")]
    DuplicateId { id: String },
    #[error("edge endpoint {id:?} is not a precinct in the graph")]
    UnknownEndpoint { id: String },
    #[error("self-loop on precinct {id:?}")]
    SelfLoop { id: String },
    #[error("negative area on precinct {id:?}")]
    NegativeArea { id: String },
    #[error("negative population on precinct {id:?}")]
    NegativePopulation { id: String },
    #[error("graph is disconnected; one precinct per component: {}", reps.join(", "))]
    Disconnected { reps: Vec<String> },

    // -- plans --
    #[error("plan references unknown precinct {id:?}")]
    UnknownPrecinct { id: String },
    #[error("plan assigns precinct {id:?} more than once")]
    DuplicateAssignment { id: String },
    #[error("invalid plan: {}", summarize_violations(.violations))]
    InvalidPlan { violations: Vec<Violation> },
    #[error("plan covers {actual} precincts but the graph has {expected}")]
    PlanGraphMismatch { expected: usize, actual: usize },

    // -- matching --
    #[error("intersection matrix must have rows <= cols, got {rows}x{cols}")]
    MatrixOrientation { rows: usize, cols: usize },
    #[error("matrix entry ({row}, {col}) is not finite")]
    NonFiniteWeight { row: usize, col: usize },
    #[error("matrix entry ({row}, {col}) is negative")]
    NegativeWeight { row: usize, col: usize },
    #[error("matrix total must be positive, got {total}")]
    NonPositiveTotal { total: f64 },
    #[error("brute-force assignment limited to {limit} columns, got {cols}")]
    BruteForceTooLarge { cols: usize, limit: usize },
    #[error("assignment maps {rows} districts but the plan has {expected}")]
    AssignmentShapeMismatch { rows: usize, expected: usize },

    // -- generation --
    #[error("cannot split {precincts} precincts into {districts} districts")]
    TooManyDistricts { districts: u32, precincts: usize },
    #[error("induced subgraph is disconnected; cannot draw a spanning tree")]
    DisconnectedSubset,
    #[error("spanning tree has a single node; no cut exists")]
    SingleNodeTree,
    #[error("no pair of adjacent districts to recombine")]
    NoAdjacentDistricts,

    // -- synth --
    #[error("circle requires at least 3 wedges, got {wedges}")]
    TooFewWedges { wedges: u32 },
    #[error("{districts} districts do not divide {wedges} wedges")]
    IndivisibleWedges { wedges: u32, districts: u32 },
    #[error("offset {offset} out of range for {wedges} wedges")]
    OffsetOutOfRange { wedges: u32, offset: u32 },
    #[error("invalid grid spec: {reason}")]
    InvalidGridSpec { reason: String },

    // -- ensembles / summaries --
    #[error("score list is empty")]
    EmptyScores,
    #[error("invalid config: {reason}")]
    InvalidConfig { reason: String },

    // -- file formats --
    #[error("malformed graph json: {reason}")]
    MalformedGraph { reason: String },
    #[error("malformed plan csv: {reason}")]
    MalformedPlan { reason: String },
    #[error("malformed scores csv: {reason}")]
    MalformedScores { reason: String },
    #[error("malformed manifest: {reason}")]
    MalformedManifest { reason: String },
    #[error("graph digest {actual} does not match manifest digest {expected}")]
    DigestMismatch { expected: String, actual: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn summarize_violations(violations: &[Violation]) -> String {
    let shown: Vec<String> = violations.iter().take(3).map(|v| v.to_string()).collect();
    if violations.len() > 3 {
        format!("{} (+{} more)", shown.join("; "), violations.len() - 3)
    } else {
        shown.join("; ")
    }
}

pub type Result<T> = std::result::Result<T, Error>;
