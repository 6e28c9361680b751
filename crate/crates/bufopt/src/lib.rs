//! Optimal buffer insertion on RC routing trees with multiple buffer types.
//!
//! The solver runs van Ginneken-style dynamic programming from the sinks to
//! the source, carrying lists of nonredundant (slack, capacitance)
//! candidates. Two buffered-candidate kernels are provided: a fast one that
//! convex-prunes each list and sweeps it once for all buffer types, and the
//! classic baseline that re-scans the list per type. An independent Elmore
//! evaluator and an exhaustive-search oracle provide ground truth, and a
//! seeded generator produces calibrated random nets for tests and scaling
//! benchmarks.
//!
//! # Modules
//!
//! - [`model`] - routing trees, buffer libraries, assignments, validation
//! - [`format`] - unit-tagged JSON net/library/assignment files
//! - [`candidate`] - the (Q, C) candidate list and its pruning kernels
//! - [`solver`] - the dynamic program and solution reconstruction
//! - [`oracle`] - independent Elmore evaluation and brute-force search
//! - [`netgen`] - seeded random net generation

pub mod candidate;
pub mod format;
pub mod model;
pub mod netgen;
pub mod oracle;
pub mod solver;

pub use candidate::{left_turn, Candidate, CandidateList, ScanStats, TraceHandle};
pub use format::{
    load_assignment, load_library, load_net, save_assignment, save_library, save_net,
};
pub use model::{
    Assignment, BufferLibrary, BufferType, DriverSpec, Edge, ModelError, RoutingTree, SinkSpec,
};
pub use netgen::{gen_library, gen_net};
pub use oracle::{brute_force, brute_force_with_cap, evaluate, EvalReport, OracleError};
pub use solver::{
    add_buffer_baseline, add_buffer_fast, add_wire, leaf_candidates, merge_branches, solve,
    Kernel, KernelStats, PruneMode, SolveResult, TraceArena, TraceNode,
};
