//! Semidefinite programs over products of real and complex PSD cones.

mod certificate;
mod ipm;
mod params;
mod presolve;
mod program;

pub use certificate::{certified_bound_for_multipliers, certified_upper_bound, repaired_bound};
pub use program::{
    check_feasibility, BlockSpec, ConicProgram, Equality, FeasibilityReport, Field, Residuals, Solution,
    SolverSettings, SparseHermitian, Status,
};

use crate::error::Result;

/// Solves a program with the interior-point method.
pub fn solve(program: &ConicProgram, settings: &SolverSettings) -> Result<Solution> {
    ipm::solve(program, settings)
}

#[cfg(test)]
mod tests;
