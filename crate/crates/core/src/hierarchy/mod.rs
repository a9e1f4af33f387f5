//! Relaxation hierarchies over PPT symmetric extensions, giving certified
//! upper bounds on the optimal fidelity, plus the analytic Bell certificate.

mod bell;
mod extension;
mod global;
mod local;

pub use bell::{bell_dual_certificate, bell_measurement_basis, bell_optimal_strategy, BellBasis, BellCertificate};
pub use global::{build_global_sdp, default_global_cuts, global_feasible_point, upper_bound, upper_bound_with_solution};
pub use local::{
    build_local_problem, build_local_sdp, default_local_cuts, local_feasible_point, separable_upper_bound,
    separable_upper_bound_with_solution, LocalEstimationProblem,
};

use crate::linalg::FactorSubset;
use crate::sdp::{Residuals, SolverSettings, Status};

/// Largest main-block side built by default.
pub const DEFAULT_MAX_SIZE: usize = 256;

#[derive(Debug, Clone, PartialEq)]
pub struct HierarchyConfig {
    pub level: usize,
    /// Partial-transpose cuts; `None` selects the default set for the level.
    pub cuts: Option<Vec<FactorSubset>>,
    pub settings: SolverSettings,
    pub max_size: usize,
    /// Use real symmetric blocks when the problem operator is real.
    pub exploit_real: bool,
}

impl Default for HierarchyConfig {
    fn default() -> Self {
        Self {
            level: 1,
            cuts: None,
            settings: SolverSettings::default(),
            max_size: DEFAULT_MAX_SIZE,
            exploit_real: true,
        }
    }
}

impl HierarchyConfig {
    pub fn at_level(level: usize) -> Self {
        Self {
            level,
            ..Self::default()
        }
    }
}

/// Outcome of one hierarchy level.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub level: usize,
    pub primal_value: f64,
    pub dual_value: f64,
    /// Rigorous upper bound recomputed from the dual multipliers.
    pub certified_bound: f64,
    pub status: Status,
    pub residuals: Residuals,
    pub iterations: usize,
    pub main_side: usize,
    /// Seconds spent solving and certifying.
    pub wall_time: f64,
}
