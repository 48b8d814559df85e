//! Stochastic minimum vertex cover in the edge-query model.
//!
//! A base graph `G` is known up front; the realized graph `G*` keeps every
//! edge independently with probability `p` and can only be observed through
//! edge queries. This crate contains the pieces needed to choose a
//! non-adaptive query set, answer it against a hidden realization and
//! analyse the result:
//!
//! * [`graph`]: base graphs, vertex and edge sets, induced subgraphs.
//! * [`realization`]: seeded sampling of `G*`, conditional sampling,
//!   exhaustive enumeration and the query oracle.
//! * [`mvc`]: exact minimum vertex cover with a canonical tie-break.
//! * [`estimate`]: `opt`, `c_v` and `c_e` estimators (exact or Monte-Carlo).
//! * [`seed`]: the L/M/S partition, the vertex-seed loop and seed sets.
//! * [`cover`]: the sparsity-constrained commit-set problem and the query phase.
//! * [`structural`]: greedy matching order, forward degrees and tail bounds.
//! * [`generate`]: deterministic instance generators.
//!
//! The crate is `no_std` (with `alloc`) unless the `std` or `parallel`
//! feature is enabled. `parallel` distributes Monte-Carlo trials over rayon;
//! results are bit-identical to serial runs.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod cover;
pub mod error;
pub mod estimate;
pub mod generate;
pub mod graph;
pub mod math;
pub mod mvc;
mod par;
pub mod realization;
pub mod rng;
pub mod seed;
pub mod structural;

pub use cover::{
    candidate_family, dense_fallback_check, objective_g, plan, query_set, run_trial,
    run_vertex_cover, solve_problem_1, solve_problem_3, CandidateContext, Plan, RunResult,
    Solution, SolverConfig, SolverMode,
};
pub use error::{Error, Result};
pub use estimate::{
    cover_statistics, edge_cover_probs, expected_mvc, membership_probs, CoverStatistics,
    EstimateMode, Estimator, ProbEstimate,
};
pub use generate::{generate, GeneratorSpec, PlantedSpec};
pub use graph::{induced_subgraph, neighbors_within, BaseGraph, EdgeSet, InducedSubgraph, VertexSet};
pub use mvc::{mvc_exact, mvc_size, CanonicalCover};
pub use realization::{
    enumerate_realizations, sample_conditional, sample_realization, PartialRealization,
    QueryOracle, Realization,
};
pub use rng::SeedSpec;
pub use seed::{
    decided, partition_lms, problematic, seed_of_realization, seed_set, set_a, undecided,
    vertex_seed, LmsPartition, SeedParams, SeedSequence, SeedSet, SeedStep,
};
pub use structural::{
    corollary_bound, empirical_tail, freedman_bound, g_tail_check, greedy_ordering,
    structural_set, tail_from_distribution, verify_structural, GTailReport, GreedyOrdering,
    StructuralReport, StructuralSet, TailReport, TailRow, STRUCTURAL_CONSTANT,
};

/// Largest edge count for which realizations are enumerated exhaustively.
pub const EXACT_EDGE_CAP: usize = 20;

/// Largest vertex count for which commit sets are enumerated exhaustively.
pub const SUBSET_ENUMERATION_CAP: usize = 20;

/// Largest connected component accepted by the exact cover solver. The
/// vertex-seed loop and the commit-set search work on whole-graph masks and
/// apply it to `n` instead.
pub const MVC_VERTEX_CAP: usize = 40;
