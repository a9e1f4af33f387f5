//! Closed-form results for Bell states shared between two qubit holders:
//! a dual certificate of value p_a + p_b for the level-1 separable
//! relaxation, and a product measurement attaining it.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{FactorSubset, HermitianOperator};
use crate::problems::{bell_kets, bell_problem, bell_states, Strategy, StrategyOutcome};

/// Dual point (λ, μ) of the level-1 separable program with the remaining
/// multipliers set to zero.
#[derive(Debug, Clone, PartialEq)]
pub struct BellCertificate {
    pub lambda: [f64; 4],
    pub mu: [f64; 4],
    /// A = Σ_i λ_i ψ_{5−i} ⊗ ψ_i on AB ⊗ C.
    pub witness_a: HermitianOperator,
    /// ρ̃ = Σ_j μ_j ψ_j on AB.
    pub rho_tilde: HermitianOperator,
    /// Σ_j μ_j.
    pub bound: f64,
    /// λ_min(ρ̃ ⊗ I_C − A^{T_A} − ρ_ABC); nonnegative when the point is feasible.
    pub feasibility_slack: f64,
}

fn check_probs(probs: &[f64]) -> Result<[f64; 4]> {
    let p: [f64; 4] = probs
        .try_into()
        .map_err(|_| Error::Validation(format!("Bell ensemble needs 4 probabilities, got {}", probs.len())))?;
    if p.iter().any(|x| !(0.0..=1.0).contains(x)) || (p.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(Error::Validation(format!("{probs:?} is not a distribution")));
    }
    Ok(p)
}

/// Indices sorted by decreasing probability, ties by index.
fn ranking(p: &[f64; 4]) -> [usize; 4] {
    let mut idx = [0, 1, 2, 3];
    idx.sort_by(|&a, &b| p[b].total_cmp(&p[a]));
    idx
}

/// λ_i = p_c and μ_i = max(p_c/2, p_i − p_c/2), where p_a ≥ p_b ≥ p_c ≥ p_d.
pub fn bell_dual_certificate(probs: &[f64]) -> Result<BellCertificate> {
    let p = check_probs(probs)?;
    let p_c = p[ranking(&p)[2]];
    let lambda = [p_c; 4];
    let mu = p.map(|pi| (p_c / 2.0).max(pi - p_c / 2.0));
    let states = bell_states();
    let mut witness = HermitianOperator::zeros(vec![2, 2, 4]);
    let mut rho_tilde = HermitianOperator::zeros(vec![2, 2]);
    for i in 0..4 {
        let c = states[i].clone().with_dims(vec![4])?;
        witness = witness.add(&states[3 - i].kron(&c).scale(lambda[i]))?;
        rho_tilde = rho_tilde.add(&states[i].scale(mu[i]))?;
    }
    let rho_abc = bell_problem(&p)?.joint_operator();
    let slack_op = rho_tilde
        .kron(&HermitianOperator::identity(vec![4]))
        .sub(&witness.partial_transpose(&FactorSubset::single(0))?)?
        .sub(&rho_abc)?;
    Ok(BellCertificate {
        lambda,
        mu,
        witness_a: witness,
        rho_tilde,
        bound: mu.iter().sum(),
        feasibility_slack: slack_op.min_eigenvalue()?,
    })
}

/// Local basis measured by both parties.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BellBasis {
    /// Computational basis; equal outcomes flag {ψ₁, ψ₂}.
    Z,
    /// Hadamard basis; equal outcomes flag {ψ₁, ψ₃}.
    X,
}

impl BellBasis {
    pub fn as_str(self) -> &'static str {
        match self {
            BellBasis::Z => "Z",
            BellBasis::X => "X",
        }
    }

    /// Bell states compatible with equal and with different outcomes.
    fn classes(self) -> [[usize; 2]; 2] {
        match self {
            BellBasis::Z => [[0, 1], [2, 3]],
            BellBasis::X => [[0, 2], [1, 3]],
        }
    }
}

fn best_in(p: &[f64; 4], class: [usize; 2]) -> usize {
    if p[class[1]] > p[class[0]] {
        class[1]
    } else {
        class[0]
    }
}

/// The basis whose outcome classes give the larger value, Z on ties.
pub fn bell_measurement_basis(probs: &[f64]) -> Result<BellBasis> {
    let p = check_probs(probs)?;
    let value = |b: BellBasis| b.classes().iter().map(|&c| p[best_in(&p, c)]).sum::<f64>();
    Ok(if value(BellBasis::X) > value(BellBasis::Z) {
        BellBasis::X
    } else {
        BellBasis::Z
    })
}

/// Both parties measure the same local basis and prepare the likeliest
/// Bell state compatible with the outcome parity. Attains p_a + p_b.
pub fn bell_optimal_strategy(probs: &[f64]) -> Result<Strategy> {
    let p = check_probs(probs)?;
    let basis = bell_measurement_basis(probs)?;
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let local: [[Complex64; 2]; 2] = match basis {
        BellBasis::Z => [[Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)], [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]],
        BellBasis::X => [[Complex64::new(h, 0.0), Complex64::new(h, 0.0)], [Complex64::new(h, 0.0), Complex64::new(-h, 0.0)]],
    };
    let kets = bell_kets();
    let classes = basis.classes();
    let mut outcomes = Vec::with_capacity(4);
    for a in 0..2 {
        for b in 0..2 {
            let pa = HermitianOperator::projector(&local[a])?;
            let pb = HermitianOperator::projector(&local[b])?;
            let guess = best_in(&p, classes[usize::from(a != b)]);
            outcomes.push(StrategyOutcome {
                povm_element: pa.kron(&pb),
                guess: HermitianOperator::projector(&kets[guess])?,
            });
        }
    }
    Strategy::new(outcomes)
}
