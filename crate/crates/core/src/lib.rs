//! SAT-based initial qubit mapping for swap-strategy routing of
//! commuting-gate circuits.
//!
//! The pipeline: represent the circuit's commuting two-qubit gates as a
//! program graph, pick a swap strategy on a hardware coupling map, encode
//! "does the program graph embed into the connectivity graph after l swap
//! layers" as CNF, and binary-search the smallest satisfiable l. The decoded
//! model is the initial mapping; routing then schedules the gates and swap
//! layers and reports CNOT counts. A spectral-clustering heuristic scales the
//! approach to graphs too large for a single SAT instance.

pub mod clustering;
pub mod error;
pub mod graphs;
pub mod mapping_search;
pub mod oracle;
pub mod router;
pub mod sat_encoding;
pub mod solver;
pub mod swap_strategy;

pub use error::{Error, Result};
pub use graphs::{
    gnp_graph, line_coupling_map, random_regular_graph, CouplingMap, ProgramGraph, RngSeed,
};
pub use mapping_search::{
    best_random_mapping, binary_search_mapping, binary_search_mapping_with, trivial_mapping,
    Mapping, SearchOutcome, TraceEntry,
};
pub use router::{route, route_with_options, verify_routing, RoutedCircuit, RouteOptions};
pub use sat_encoding::{decode_model, encode_embedding, to_dimacs, CnfFormula, PinSet, VarMap};
pub use solver::{solve, solve_external, SolveBudget, SolveOutcome, SolveStatus, SolverBackend};
pub use swap_strategy::{
    connectivity_graph, line_swap_strategy, permutation_after, ConnectivityGraph, SwapLayer,
    SwapStrategy,
};
