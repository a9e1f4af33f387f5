use super::extension::{build_extension, identity_point, solve_and_report, Extension};
use super::{BoundReport, HierarchyConfig};
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, FactorSubset};
use crate::problems::EstimationProblem;
use crate::sdp::{ConicProgram, Field, Solution};

/// Cuts for level `n` on factors [A_1, .., A_n, B]: the last k copies of A
/// for k = 1..n−1, then B alone.
pub fn default_global_cuts(level: usize) -> Vec<FactorSubset> {
    let mut cuts: Vec<FactorSubset> = (1..level)
        .map(|k| FactorSubset::new(level - k..level).expect("distinct positions"))
        .collect();
    cuts.push(FactorSubset::single(level));
    cuts
}

fn ext<'a>(p: &'a EstimationProblem, c: &HierarchyConfig) -> Result<Extension<'a>> {
    let n = c.level;
    if n == 0 {
        return Err(Error::Validation("hierarchy level must be at least 1".into()));
    }
    let (d_a, d_b) = (p.d_a(), p.d_b());
    let size = (d_a as u128)
        .checked_pow(n as u32)
        .and_then(|x| x.checked_mul(d_b as u128))
        .unwrap_or(u128::MAX);
    if size > c.max_size as u128 {
        return Err(Error::SizeCap {
            size: usize::try_from(size).unwrap_or(usize::MAX),
            cap: c.max_size,
        });
    }
    let mut factor_dims = vec![d_a; n];
    factor_dims.push(d_b);
    let field = if c.exploit_real && p.rho().is_real(0.0) {
        Field::Real
    } else {
        Field::Complex
    };
    Ok(Extension {
        factor_dims,
        copy_groups: vec![(0..n).collect()],
        kept: FactorSubset::single(0),
        rho: p.rho(),
        rho_factors: FactorSubset::new([0, n])?,
        cuts: c.cuts.clone().unwrap_or_else(|| default_global_cuts(n)),
        field,
    })
}

/// The level-n program: maximize tr((ρ ⊗ I) Ω) over extensions Ω on
/// [A_1, .., A_n, B] that are symmetric in the A copies, reduce to I on A_1
/// after tracing everything else, and stay PSD under every configured cut.
pub fn build_global_sdp(p: &EstimationProblem, c: &HierarchyConfig) -> Result<ConicProgram> {
    build_extension(&ext(p, c)?)
}

/// Ω = (I/d_A)^{⊗(n−1)} ⊗ I_{A_1} ⊗ I_B / d_B on every block, a strictly
/// feasible point of the level-n program.
pub fn global_feasible_point(p: &EstimationProblem, c: &HierarchyConfig) -> Result<Vec<ComplexMatrix>> {
    let s = ext(p, c)?;
    Ok(identity_point(&s.factor_dims, &s.kept, 1 + s.cuts.len()))
}

pub fn upper_bound(p: &EstimationProblem, c: &HierarchyConfig) -> Result<BoundReport> {
    Ok(upper_bound_with_solution(p, c)?.2)
}

/// Builds, solves and certifies one level.
pub fn upper_bound_with_solution(
    p: &EstimationProblem,
    c: &HierarchyConfig,
) -> Result<(ConicProgram, Solution, BoundReport)> {
    let program = build_global_sdp(p, c)?;
    let (sol, report) = solve_and_report(&program, c)?;
    Ok((program, sol, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::permutation_operator;
    use crate::problems::{build_problem, isotropic_problem, two_state_problem, Ensemble};
    use crate::sdp::{check_feasibility, Status};
    use num_complex::Complex64;

    fn qubit_problem() -> EstimationProblem {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let kets = vec![
            vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
            vec![Complex64::new(h, 0.0), Complex64::new(0.0, h)],
        ];
        build_problem(&Ensemble::from_kets(&[0.5, 0.5], &kets, &kets).unwrap()).unwrap()
    }

    #[test]
    fn level_one_block_structure() {
        let p = isotropic_problem(2).unwrap();
        let prog = build_global_sdp(&p, &HierarchyConfig::default()).unwrap();
        assert_eq!(prog.blocks().len(), 2);
        assert_eq!(prog.blocks()[0].side, 4);
        assert_eq!(prog.blocks()[1].name, "pt[1]");
        assert!(prog.trace_caps().iter().all(|c| *c == Some(2.0)));
    }

    #[test]
    fn level_two_qubits() {
        let c = HierarchyConfig::at_level(2);
        let prog = build_global_sdp(&qubit_problem(), &c).unwrap();
        assert_eq!(prog.blocks()[0].side, 8);
        let cuts = default_global_cuts(2);
        assert_eq!(cuts, vec![FactorSubset::single(1), FactorSubset::single(2)]);
        assert_eq!(prog.blocks().len(), 3);
        assert_eq!(prog.blocks()[0].field, Field::Complex);
    }

    #[test]
    fn identity_point_is_strictly_feasible() {
        for (level, p) in [(1, qubit_problem()), (2, qubit_problem()), (3, isotropic_problem(2).unwrap())] {
            let c = HierarchyConfig::at_level(level);
            let prog = build_global_sdp(&p, &c).unwrap();
            let x = global_feasible_point(&p, &c).unwrap();
            let report = check_feasibility(&prog, &x).unwrap();
            assert!(report.max_equality_violation <= 1e-12, "level {level}");
            assert!(report.min_eigenvalue() > 0.0);
        }
    }

    #[test]
    fn size_cap_is_enforced() {
        let c = HierarchyConfig {
            level: 4,
            max_size: 16,
            ..HierarchyConfig::default()
        };
        assert!(matches!(
            build_global_sdp(&qubit_problem(), &c),
            Err(Error::SizeCap { size: 32, cap: 16 })
        ));
    }

    #[test]
    fn isotropic_and_helstrom_values() {
        let r = upper_bound(&isotropic_problem(2).unwrap(), &HierarchyConfig::default()).unwrap();
        assert_eq!(r.status, Status::Optimal);
        assert!((r.certified_bound - 2.0 / 3.0).abs() <= 1e-6);
        assert!(r.certified_bound >= 2.0 / 3.0 - 1e-9);
        let p = two_state_problem(0.6, 0.5).unwrap();
        let r = upper_bound(&p, &HierarchyConfig::default()).unwrap();
        assert!((r.certified_bound - 0.9).abs() <= 1e-6);
    }

    #[test]
    fn level_two_solution_is_symmetric() {
        let c = HierarchyConfig::at_level(2);
        let (_, sol, report) = upper_bound_with_solution(&qubit_problem(), &c).unwrap();
        assert_eq!(report.status, Status::Optimal);
        let omega = &sol.primal_blocks[0];
        let perm = permutation_operator(&[1, 0, 2], 2).unwrap();
        let moved = perm.matmul(omega).matmul(&perm.adjoint());
        assert!((&moved - omega).frobenius_norm() <= 1e-6);
        let lvl1 = upper_bound(&qubit_problem(), &HierarchyConfig::default()).unwrap();
        assert!(report.certified_bound <= lvl1.certified_bound + 1e-6);
    }
}
