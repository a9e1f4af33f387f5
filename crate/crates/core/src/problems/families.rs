use num_complex::Complex64;

use super::{build_problem, Ensemble, EnsembleItem, EstimationProblem};
use crate::error::{Error, Result};
use crate::linalg::{flip_operator, ComplexMatrix, HermitianOperator};

/// Largest encoded dimension accepted by [`copies_problem`].
pub const DEFAULT_COPIES_CAP: usize = 256;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn basis_ket(d: usize, i: usize) -> Vec<Complex64> {
    let mut v = vec![c(0.0); d];
    v[i] = c(1.0);
    v
}

fn kron_kets(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    a.iter().flat_map(|x| b.iter().map(move |y| x * y)).collect()
}

/// Haar-random pure states estimated from themselves: ρ = (I + V)/(d(d+1)).
pub fn isotropic_problem(d: usize) -> Result<EstimationProblem> {
    if d < 2 {
        return Err(Error::Validation(format!("isotropic family needs d >= 2, got {d}")));
    }
    let mut m = ComplexMatrix::identity(d * d);
    m += flip_operator(d).matrix();
    let rho = HermitianOperator::new(vec![d, d], m.scale(1.0 / (d * (d + 1)) as f64))?;
    Ok(EstimationProblem::symbolic("isotropic", d, rho))
}

/// Werner-type strategy operator Λ(t) = [(d−t)I + (dt−1)V]/(d²−1), the
/// normalized Werner state scaled by d so that tr_B Λ = I.
pub fn werner_operator(t: f64, d: usize) -> Result<HermitianOperator> {
    if !(-1.0..=1.0).contains(&t) {
        return Err(Error::Validation(format!("Werner parameter {t} outside [-1, 1]")));
    }
    if d < 2 {
        return Err(Error::Validation(format!("Werner operator needs d >= 2, got {d}")));
    }
    let df = d as f64;
    let mut m = ComplexMatrix::identity(d * d).scale(df - t);
    m.axpy(df * t - 1.0, flip_operator(d).matrix());
    HermitianOperator::new(vec![d, d], m.scale(1.0 / (df * df - 1.0)))
}

/// The Bell kets ψ_{1,2} = (|00⟩ ± |11⟩)/√2, ψ_{3,4} = (|01⟩ ± |10⟩)/√2.
pub fn bell_kets() -> [Vec<Complex64>; 4] {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    [
        vec![c(h), c(0.0), c(0.0), c(h)],
        vec![c(h), c(0.0), c(0.0), c(-h)],
        vec![c(0.0), c(h), c(h), c(0.0)],
        vec![c(0.0), c(h), c(-h), c(0.0)],
    ]
}

/// Projectors onto the Bell kets, with dims [2, 2].
pub fn bell_states() -> [HermitianOperator; 4] {
    bell_kets().map(|k| {
        HermitianOperator::projector(&k)
            .and_then(|p| p.with_dims(vec![2, 2]))
            .expect("Bell kets are valid")
    })
}

/// Bell states shared between two qubit holders, estimated as themselves on C⁴.
pub fn bell_problem(probs: &[f64]) -> Result<Ensemble> {
    if probs.len() != 4 {
        return Err(Error::Validation(format!("Bell ensemble needs 4 probabilities, got {}", probs.len())));
    }
    let states = bell_states();
    let items = probs
        .iter()
        .zip(states)
        .map(|(&prob, s)| {
            Ok(EnsembleItem {
                prob,
                target: s.clone().with_dims(vec![4])?,
                encoded: s,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ensemble::new(items)
}

/// State discrimination: targets are the computational projectors |i⟩⟨i|.
pub fn discrimination_problem(probs: &[f64], encoded: &[HermitianOperator]) -> Result<Ensemble> {
    if probs.len() != encoded.len() {
        return Err(Error::Validation(format!(
            "{} probabilities for {} encoded states",
            probs.len(),
            encoded.len()
        )));
    }
    let k = probs.len();
    let items = probs
        .iter()
        .zip(encoded)
        .enumerate()
        .map(|(i, (&prob, e))| {
            Ok(EnsembleItem {
                prob,
                target: HermitianOperator::projector(&basis_ket(k, i))?,
                encoded: e.clone(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ensemble::new(items)
}

/// Discrimination of |0⟩ and overlap·|0⟩ + √(1−overlap²)·|1⟩ with priors (p, 1−p).
pub fn two_state_problem(overlap: f64, p: f64) -> Result<EstimationProblem> {
    if !(0.0..=1.0).contains(&overlap) {
        return Err(Error::Validation(format!("overlap {overlap} outside [0, 1]")));
    }
    let a = HermitianOperator::projector(&[c(1.0), c(0.0)])?;
    let b = HermitianOperator::projector(&[c(overlap), c((1.0 - overlap * overlap).max(0.0).sqrt())])?;
    build_problem(&discrimination_problem(&[p, 1.0 - p], &[a, b])?)
}

/// Tomography-style ensemble: each pure target is encoded as N copies.
pub fn copies_problem(targets: &[Vec<Complex64>], probs: &[f64], n_copies: usize) -> Result<Ensemble> {
    copies_problem_with_cap(targets, probs, n_copies, DEFAULT_COPIES_CAP)
}

pub fn copies_problem_with_cap(
    targets: &[Vec<Complex64>],
    probs: &[f64],
    n_copies: usize,
    cap: usize,
) -> Result<Ensemble> {
    if n_copies == 0 {
        return Err(Error::Validation("at least one copy is required".into()));
    }
    let d = targets
        .first()
        .ok_or_else(|| Error::Validation("no targets given".into()))?
        .len();
    let size = (d as u128).checked_pow(n_copies as u32).unwrap_or(u128::MAX);
    if size > cap as u128 {
        return Err(Error::SizeCap {
            size: usize::try_from(size).unwrap_or(usize::MAX),
            cap,
        });
    }
    let encoded: Vec<Vec<Complex64>> = targets
        .iter()
        .map(|t| {
            let norm = t.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            let unit: Vec<Complex64> = t.iter().map(|z| z / norm).collect();
            (1..n_copies).fold(unit.clone(), |acc, _| kron_kets(&acc, &unit))
        })
        .collect();
    let e = Ensemble::from_kets(probs, targets, &encoded)?;
    if n_copies > 1 {
        e.with_encoded_dims(vec![d; n_copies])
    } else {
        Ok(e)
    }
}

/// The nine orthogonal 3⊗3 domino product kets.
pub fn domino_kets() -> Vec<Vec<Complex64>> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let e = |i: usize| basis_ket(3, i);
    let pair = |i: usize, j: usize, s: f64| {
        let mut v = vec![c(0.0); 3];
        v[i] = c(h);
        v[j] = c(s * h);
        v
    };
    let products = vec![
        (e(1), e(1)),
        (e(0), pair(0, 1, 1.0)),
        (e(0), pair(0, 1, -1.0)),
        (e(2), pair(1, 2, 1.0)),
        (e(2), pair(1, 2, -1.0)),
        (pair(1, 2, 1.0), e(0)),
        (pair(1, 2, -1.0), e(0)),
        (pair(0, 1, 1.0), e(2)),
        (pair(0, 1, -1.0), e(2)),
    ];
    products.iter().map(|(a, b)| kron_kets(a, b)).collect()
}

/// Uniform domino ensemble: encoded on C³ ⊗ C³, targets the same kets on C⁹.
pub fn domino_problem() -> Result<Ensemble> {
    let kets = domino_kets();
    let probs = vec![1.0 / 9.0; 9];
    Ensemble::from_kets(&probs, &kets, &kets)?.with_encoded_dims(vec![3, 3])
}
