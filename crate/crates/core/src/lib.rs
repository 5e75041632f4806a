//! Power-minimising link scheduling for indoor visible-light networks.
//!
//! A [`Network`] bundles a validated [`Scenario`] with its candidate links,
//! conflict graph and precomputed illuminance gains. [`column_generation`]
//! finds a schedule of independent sets and time fractions that meets every
//! terminal's demand at minimum electrical power while keeping the desk
//! illuminance inside its bounds, and [`reality_check`] re-evaluates that
//! schedule under SINR-exact interference.

pub mod baselines;
pub mod capacity;
pub mod cg;
pub mod conflict;
pub mod experiments;
pub mod geometry;
pub mod network;
pub mod optics;
pub mod par;
pub mod scenario;

use thiserror::Error;

pub use cg::{
    column_generation, reality_check, CgOptions, CgSolution, CgStatus, Column, IterationRecord,
};
pub use conflict::{build_conflict_graph, is_independent, pairwise_sir, ConflictGraph};
pub use network::Network;
pub use scenario::{load_scenario, Scenario, ScenarioConfig};

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Scenario(#[from] scenario::ScenarioError),
    #[error(transparent)]
    Optics(#[from] optics::OpticsError),
    #[error(transparent)]
    Conflict(#[from] conflict::ConflictError),
    #[error("LP solver: {0}")]
    Lp(#[from] vlc_lp::LpError),
    #[error("illuminance bounds unattainable with lighting only; first violated grid point {point} at ({x:.3}, {y:.3})")]
    IlluminationInfeasible { point: usize, x: f64, y: f64 },
    #[error("no single link can be scheduled within the illuminance bounds")]
    NoFeasibleColumn,
    #[error("numerical trouble: {0}")]
    Numerical(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Tolerances used throughout the solver.
pub mod tolerances {
    /// Primal feasibility of LP solutions.
    pub const LP_FEASIBILITY: f64 = vlc_lp::FEASIBILITY_TOL;
    /// Reduced-cost cutoff, relative to `1 + P_illumi^min`.
    pub const REDUCED_COST: f64 = 1e-9;
    /// Allowed illuminance violation of an accepted column, lux.
    pub const ILLUMINANCE: f64 = 1e-6;
    /// Margin by which LP illuminance rows are tightened, lux.
    pub const ILLUMINANCE_MARGIN: f64 = 1e-5;
    /// Time fractions below this are treated as unscheduled.
    pub const OMEGA: f64 = 1e-12;
    /// Shortfall, Mbps, above which demands count as unmet.
    pub const SLACK: f64 = 1e-7;
    /// Penalty per Mbps of unmet demand in the master problem, W.
    pub const SLACK_COST: f64 = 1e6;
}
