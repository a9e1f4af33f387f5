use std::cmp::Reverse;

use super::extension::{build_extension, identity_point, solve_and_report, Extension};
use super::{BoundReport, HierarchyConfig};
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, FactorSubset, HermitianOperator};
use crate::problems::{build_problem, Ensemble, EstimationProblem};
use crate::sdp::{ConicProgram, Field, Solution};

/// An ensemble whose encoded states are shared between distant parties.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalEstimationProblem {
    ensemble: Ensemble,
    party_dims: Vec<usize>,
    /// Σ_i p_i Ψ'_i ⊗ Ψ_i with dims `party_dims ++ [d_C]`.
    rho: HermitianOperator,
}

impl LocalEstimationProblem {
    pub fn ensemble(&self) -> &Ensemble {
        &self.ensemble
    }

    pub fn party_dims(&self) -> &[usize] {
        &self.party_dims
    }

    pub fn d_c(&self) -> usize {
        self.ensemble.d_b()
    }

    pub fn rho(&self) -> &HermitianOperator {
        &self.rho
    }

    /// The same ensemble with the parties merged into one encoded system.
    pub fn joint_problem(&self) -> Result<EstimationProblem> {
        build_problem(&self.ensemble)
    }
}

/// Splits the encoded space of `e` among parties of dimensions `split`.
pub fn build_local_problem(e: &Ensemble, split: &[usize]) -> Result<LocalEstimationProblem> {
    if split.is_empty() || split.contains(&0) {
        return Err(Error::Dimension(format!("invalid party split {split:?}")));
    }
    let ensemble = e.with_encoded_dims(split.to_vec())?;
    let rho = ensemble.joint_operator();
    Ok(LocalEstimationProblem {
        ensemble,
        party_dims: split.to_vec(),
        rho,
    })
}

fn party_copies(party: usize, level: usize) -> std::ops::Range<usize> {
    party * level..(party + 1) * level
}

/// Cuts for `parties` senders at level n on factors
/// [P1 copies.., P2 copies.., .., C]: for every nonzero vector of counts
/// (k_1, .., k_p), the last k_i copies of each party; the all-n vector is
/// replaced by its complement {C}.
pub fn default_local_cuts(parties: usize, level: usize) -> Vec<FactorSubset> {
    let mut counts: Vec<Vec<usize>> = Vec::new();
    let total = (level + 1).pow(parties as u32);
    for code in 1..total {
        let mut k = Vec::with_capacity(parties);
        let mut rest = code;
        for _ in 0..parties {
            k.push(rest % (level + 1));
            rest /= level + 1;
        }
        counts.push(k);
    }
    counts.sort_by_key(|k| (k.iter().sum::<usize>(), Reverse(k.clone())));
    counts
        .into_iter()
        .map(|k| {
            if k.iter().all(|&x| x == level) {
                FactorSubset::single(parties * level)
            } else {
                let idx = k
                    .iter()
                    .enumerate()
                    .flat_map(|(party, &kk)| {
                        let r = party_copies(party, level);
                        r.end - kk..r.end
                    });
                FactorSubset::new(idx).expect("distinct positions")
            }
        })
        .collect()
}

fn ext<'a>(p: &'a LocalEstimationProblem, c: &HierarchyConfig) -> Result<Extension<'a>> {
    let n = c.level;
    if n == 0 {
        return Err(Error::Validation("hierarchy level must be at least 1".into()));
    }
    let parties = p.party_dims.len();
    let size = p
        .party_dims
        .iter()
        .try_fold(p.d_c() as u128, |acc, &d| acc.checked_mul((d as u128).checked_pow(n as u32)?))
        .unwrap_or(u128::MAX);
    if size > c.max_size as u128 {
        return Err(Error::SizeCap {
            size: usize::try_from(size).unwrap_or(usize::MAX),
            cap: c.max_size,
        });
    }
    let mut factor_dims: Vec<usize> = p.party_dims.iter().flat_map(|&d| std::iter::repeat_n(d, n)).collect();
    factor_dims.push(p.d_c());
    let firsts: Vec<usize> = (0..parties).map(|i| i * n).collect();
    let mut rho_factors = firsts.clone();
    rho_factors.push(parties * n);
    let field = if c.exploit_real && p.rho.is_real(0.0) {
        Field::Real
    } else {
        Field::Complex
    };
    Ok(Extension {
        factor_dims,
        copy_groups: (0..parties).map(|i| party_copies(i, n).collect()).collect(),
        kept: FactorSubset::new(firsts)?,
        rho: &p.rho,
        rho_factors: FactorSubset::new(rho_factors)?,
        cuts: c.cuts.clone().unwrap_or_else(|| default_local_cuts(parties, n)),
        field,
    })
}

/// The level-n triseparable relaxation: maximize tr((ρ ⊗ I) Ω) over Ω on
/// n copies of each party plus C, symmetric within each party's copies,
/// reducing to I on the first copies, and PSD under every configured cut.
pub fn build_local_sdp(p: &LocalEstimationProblem, c: &HierarchyConfig) -> Result<ConicProgram> {
    build_extension(&ext(p, c)?)
}

/// The scaled identity, a strictly feasible point of the level-n program.
pub fn local_feasible_point(p: &LocalEstimationProblem, c: &HierarchyConfig) -> Result<Vec<ComplexMatrix>> {
    let s = ext(p, c)?;
    Ok(identity_point(&s.factor_dims, &s.kept, 1 + s.cuts.len()))
}

pub fn separable_upper_bound(p: &LocalEstimationProblem, c: &HierarchyConfig) -> Result<BoundReport> {
    Ok(separable_upper_bound_with_solution(p, c)?.2)
}

pub fn separable_upper_bound_with_solution(
    p: &LocalEstimationProblem,
    c: &HierarchyConfig,
) -> Result<(ConicProgram, Solution, BoundReport)> {
    let program = build_local_sdp(p, c)?;
    let (sol, report) = solve_and_report(&program, c)?;
    Ok((program, sol, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{bell_problem, domino_problem};
    use crate::sdp::check_feasibility;

    fn bell(probs: &[f64]) -> LocalEstimationProblem {
        build_local_problem(&bell_problem(probs).unwrap(), &[2, 2]).unwrap()
    }

    #[test]
    fn level_one_cuts_are_each_party() {
        let cuts = default_local_cuts(2, 1);
        assert_eq!(
            cuts,
            vec![FactorSubset::single(0), FactorSubset::single(1), FactorSubset::single(2)]
        );
        assert_eq!(default_local_cuts(2, 2).len(), 8);
    }

    #[test]
    fn bell_program_shapes() {
        let p = bell(&[0.25; 4]);
        assert_eq!(p.rho().dims(), &[2, 2, 4]);
        assert!((p.rho().trace() - 1.0).abs() < 1e-14);
        let prog = build_local_sdp(&p, &HierarchyConfig::default()).unwrap();
        assert_eq!(prog.blocks().len(), 4);
        assert_eq!(prog.blocks()[0].side, 16);
        assert!(prog.trace_caps().iter().all(|c| *c == Some(4.0)));
        let two = build_local_sdp(&p, &HierarchyConfig::at_level(2)).unwrap();
        assert_eq!(two.blocks()[0].side, 64);
    }

    #[test]
    fn identity_point_feasible() {
        let p = bell(&[0.4, 0.3, 0.2, 0.1]);
        for level in [1, 2] {
            let c = HierarchyConfig::at_level(level);
            let prog = build_local_sdp(&p, &c).unwrap();
            let report = check_feasibility(&prog, &local_feasible_point(&p, &c).unwrap()).unwrap();
            assert!(report.max_equality_violation <= 1e-12);
            assert!(report.min_eigenvalue() > 0.0);
        }
    }

    #[test]
    fn domino_rho_rank() {
        let p = build_local_problem(&domino_problem().unwrap(), &[3, 3]).unwrap();
        assert_eq!(p.rho().dims(), &[3, 3, 9]);
        let rank = p.rho().eig().unwrap().values.iter().filter(|v| **v > 1e-12).count();
        assert_eq!(rank, 9);
    }

    #[test]
    fn non_factoring_split_is_rejected() {
        assert!(build_local_problem(&bell_problem(&[0.25; 4]).unwrap(), &[3, 2]).is_err());
    }

    #[test]
    fn bell_level_one_value() {
        let r = separable_upper_bound(&bell(&[0.4, 0.3, 0.2, 0.1]), &HierarchyConfig::default()).unwrap();
        assert!((r.certified_bound - 0.7).abs() <= 1e-6, "{r:?}");
    }
}
