//! Small linear and mixed-integer programming toolkit.
//!
//! [`solve_lp`] is a dense two-phase tableau simplex that returns primal
//! values together with one dual price per row. [`solve_milp`] wraps it in a
//! best-first branch-and-bound for programs with a few hundred integer
//! variables at most. Both are deterministic: pivot and branching choices
//! break ties by lowest index.

mod milp;
mod model;
mod simplex;

pub use milp::{solve_milp, MilpOptions, MilpSolution, MilpStatus, MixedIntegerProgram};
pub use model::{LinearProgram, LpError, LpSolution, LpStatus, Relation, Row};
pub use simplex::solve_lp;

/// Primal feasibility tolerance used when validating returned solutions.
pub const FEASIBILITY_TOL: f64 = 1e-7;
