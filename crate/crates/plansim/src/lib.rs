//! Districting-plan ensembles and a relabeling-invariant similarity score.
//!
//! A districting plan partitions the precincts of a [`graph::DualGraph`]
//! into contiguous districts. Two plans that draw essentially the same map
//! can still use arbitrary district numbering, so comparing them starts by
//! matching districts: build the [`similarity::IntersectionMatrix`] of
//! shared area (or population) between every district pair, find the
//! maximum-weight assignment, and divide the matched weight by the total.
//! The resulting score lives in `[1/m, 1]`, is 1 exactly for relabelings of
//! the same plan, and is symmetric.
//!
//! Plan ensembles come from spanning-tree recombination chains
//! ([`recom::run_chain`]): each step merges a random pair of adjacent
//! districts and re-splits them along the most population-balanced edge cut
//! of a random spanning tree. [`ensemble::run_ensemble`] runs many chains
//! from a deterministic seed plan and [`ensemble::pairwise_similarity`]
//! scores every pair, reproducing the study protocol end to end.
//!
//! Everything is deterministic given the explicit seeds: chains use ChaCha8
//! streams derived per chain, so results are identical across platforms and
//! thread counts.
//!
//! ```
//! use plansim::ensemble::{pairwise_similarity, run_ensemble, EnsembleConfig};
//! use plansim::graph::WeightKind;
//! use plansim::synth::{grid_state, GridSpec, PopulationPattern};
//!
//! let graph = grid_state(&GridSpec {
//!     rows: 6,
//!     cols: 6,
//!     population: PopulationPattern::Uniform { per_cell: 10 },
//! })?;
//! let plans = run_ensemble(
//!     &graph,
//!     &EnsembleConfig {
//!         num_chains: 4,
//!         districts: 3,
//!         steps_per_chain: 30,
//!         base_seed: 7,
//!         parallelism: 2,
//!         trees_per_step: 1,
//!     },
//! )?;
//! let scores = pairwise_similarity(&graph, &plans, WeightKind::Area)?;
//! assert_eq!(scores.entries.len(), 6);
//! # Ok::<(), plansim::error::Error>(())
//! ```

#![forbid(unsafe_code)]

pub mod cli;
pub mod ensemble;
pub mod error;
pub mod graph;
pub mod io;
pub mod plan;
pub mod recom;
pub mod similarity;
pub mod synth;

pub use error::{Error, Result};
pub use graph::{DualGraph, Precinct, WeightKind};
pub use plan::{
    district_weights, population_deviation, validate_plan, Plan, Violation,
};
pub use similarity::{
    brute_force_assignment, intersection_matrix, relabel_plan, similarity_score,
    similarity_scores, solve_assignment, Assignment, IntersectionMatrix, SimilarityScore,
};
