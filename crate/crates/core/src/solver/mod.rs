//! Budget-constrained orienteering solver.
//!
//! Graphs are dense and directed; index 0 is the start depot and the last
//! index the end depot. [`solve_iacs`] is the working solver,
//! [`exact_solve`] an exhaustive oracle for small graphs.

mod acs;
mod exact;
mod graph;
mod nearest;
mod operators;
mod two_opt;

pub use acs::{
    heuristic, select_next_node, solve_iacs, solve_iacs_traced, write_convergence_csv, AcsParams, IterationStats,
    PheromoneMatrix,
};
pub use exact::{exact_solve, EXACT_LIMIT};
pub use graph::{validate_path, CostGraph, PathSolution};
pub use nearest::nearest_neighbor_path;
pub use operators::{add_operator, add_value, drop_operator, drop_value};
pub use two_opt::two_opt;
