use super::program::{ConicProgram, Solution};
use crate::error::{Error, Result};
use crate::linalg::min_eigenvalue_matrix;

/// Rigorous upper bound on the optimal value from a solver run.
///
/// Only the multipliers are trusted; the slacks and the dual value are
/// recomputed from the program. See [`certified_bound_for_multipliers`].
pub fn certified_upper_bound(p: &ConicProgram, sol: &Solution) -> Result<f64> {
    certified_bound_for_multipliers(p, &sol.dual_multipliers)
}

/// Rigorous upper bound on the optimal value from any dual multipliers.
///
/// With `S_b = Σ_k y_k A_kb − C_b`, every feasible `X` satisfies
/// `Σ tr(C_b X_b) = b·y − Σ tr(S_b X_b)`, and
/// `−tr(S_b X_b) ≤ cap_b · max(0, −λ_min(S_b))` since `tr X_b = cap_b`.
pub fn certified_bound_for_multipliers(p: &ConicProgram, y: &[f64]) -> Result<f64> {
    if y.len() != p.equalities().len() {
        return Err(Error::Dimension(format!(
            "{} multipliers for {} equalities",
            y.len(),
            p.equalities().len()
        )));
    }
    let caps = p
        .trace_caps()
        .iter()
        .enumerate()
        .map(|(b, cap)| {
            cap.ok_or_else(|| Error::MissingTraceCap {
                block: p.blocks()[b].name.clone(),
            })
        })
        .collect::<Result<Vec<f64>>>()?;
    let by: f64 = p.equalities().iter().zip(y).map(|(e, yk)| e.rhs * yk).sum();
    let slacks = p
        .dual_slacks(y)
        .iter()
        .zip(caps)
        .map(|(s, cap)| Ok((min_eigenvalue_matrix(s)?, cap)))
        .collect::<Result<Vec<_>>>()?;
    Ok(repaired_bound(by, &slacks))
}

/// `dual_value + Σ cap · max(0, −λ_min)` over `(λ_min, cap)` pairs.
pub fn repaired_bound(dual_value: f64, slacks: &[(f64, f64)]) -> f64 {
    dual_value + slacks.iter().map(|&(lmin, cap)| cap * (-lmin).max(0.0)).sum::<f64>()
}
