//! Exact solver for the bilevel knapsack problem with interdiction
//! constraints.
//!
//! A leader interdicts items within a budget `C_u`; a follower then packs
//! the remaining items into a knapsack of capacity `C_l` maximizing profit.
//! The leader minimizes the follower's optimum. [`solve`] returns a certified
//! optimum; [`oracle::brute_force`] is the enumeration reference for small
//! instances.

pub mod bench;
pub mod error;
pub mod generator;
pub mod instance;
pub mod knapsack;
pub mod milp;
pub mod models;
pub mod oracle;
pub mod solver;

pub use error::{BkpError, ParseError, Result};
pub use generator::{generate, generate_relaxed, GenSpec, Generated};
pub use instance::{
    read_instance, sort_by_efficiency, write_instance, Instance, Permutation, Violation,
};
pub use models::TupleGenParams;
pub use oracle::{brute_force, OracleResult};
pub use solver::{solve, solve_with, BilevelSolution, SolveStats, SolverParams};
