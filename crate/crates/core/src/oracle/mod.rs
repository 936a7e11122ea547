//! Grid oracle for torus-invariant relative extremal functions.
//!
//! For complete Reinhardt data an invariant function is plurisubharmonic
//! exactly when it is convex and nondecreasing in `t = log ρ`, so
//! `h*_{A,D}` becomes the largest convex nondecreasing function that is
//! `≤ 0` on `A` and `≤ 1` on `D`.

pub mod grid;
pub mod solver;
pub mod verify;

use thiserror::Error;

pub use grid::{Axis, Boundary, GridFn, LogGrid, RegionSpec};
pub use solver::{constraint_slack, convex_monotone_envelope, SolveStats, Solved};
pub use verify::{
    build_obstacle, compute_h_star, interior_deviation, solve_case, verify_identity, verify_report,
    CaseSolution, GridParams, IdentityCase, Profile, VerifyReport,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("grid error: {0}")]
    Grid(String),
    #[error("degenerate problem: {0}")]
    Degenerate(String),
    #[error("no convergence after {sweeps} sweeps (last residual {residual:e})")]
    Convergence { sweeps: usize, residual: f64 },
    #[error("{0}")]
    Case(String),
    #[error("problem needs more factors than the {0} supplied")]
    Dimension(usize),
}

pub type Result<T> = std::result::Result<T, OracleError>;
