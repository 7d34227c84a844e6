//! Contingency screening toolkit for transmission grids.
//!
//! The pipeline turns a steady-state network case into a short list of
//! damaging multi-branch outage sets:
//!
//! ```text
//!   case file ──► DC sensitivities (ISF / LODF) ──► branch impact metrics
//!        │                                               │
//!        │            ┌──────────────────────────────────┘
//!        ▼            ▼
//!   weighted grid graph ──► search subgraphs around seed branches
//!                                  │
//!                                  ▼
//!                  greedy group-betweenness selection (candidate sets)
//!                                  │
//!                                  ▼
//!                  AC power-flow validation + violation classification
//! ```
//!
//! Modules mirror the stages: [`case`] holds the network model and file
//! format, [`dc`] the linearized sensitivities, [`metrics`] the per-branch
//! impact scores, [`graph`]/[`gbc`] the topological search, [`screening`]
//! the end-to-end candidate generator, [`ac`]/[`validation`] the nonlinear
//! check, and [`oracle`] slow-but-simple reference implementations used for
//! cross-checking (exhaustive enumeration, exact-arithmetic betweenness).
//!
//! All heavy routines are deterministic: rank orders break ties on branch
//! index, parallel sections reduce in a fixed order, and reports serialize
//! identically regardless of thread count.

pub mod ac;
pub mod case;
#[cfg(test)]
pub(crate) mod testgrids;
pub mod dc;
pub mod gbc;
pub mod graph;
pub mod metrics;
pub mod oracle;
pub mod report;
pub mod screening;
pub mod validation;

pub use ac::{solve_ac, AcSolution};
pub use case::{parse_case, serialize_case, Branch, Bus, BusKind, CaseFormatError, Gen, NetworkCase};
pub use dc::{compute_lodf, solve_dc, DcSensitivities, DcSolution, SolveError};
pub use gbc::{gbc_score, gbc_score_with, select_group, select_group_with, GbcResult, PairExclusion};
pub use graph::{
    branch_hop_distance, build_grid_graph, build_subgraph, GridGraph, NodeRole, SearchSubgraph,
};
pub use metrics::{compute_metrics, rank_branches, BranchMetrics};
pub use oracle::{brute_force_contingencies, gbc_exhaustive, BruteForceResult};
pub use report::{ContingencyRecord, RunManifest, StageTimings};
pub use screening::{run_screening, CandidateSet, ScreeningConfig, ScreeningOutput};
pub use validation::{
    apply_outage, classify, default_reserve_requirement, validate_outage, AppliedOutage,
    ValidationMethod, ViolationDetail, ViolationReport,
};
