//! Seesaw search over global measure-and-prepare strategies: alternately
//! solve for the optimal POVM given the guesses, and for the optimal guesses
//! given the POVM. Every sweep is monotone, so the result is an attainable
//! lower bound on the optimal fidelity.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::random::random_ket;
use crate::linalg::{hermitian_eig_matrix, ComplexMatrix, HermitianOperator};
use crate::problems::{average_fidelity, Ensemble, EstimationProblem, Strategy, StrategyOutcome};
use crate::sdp::{solve, ConicProgram, Field, SolverSettings, SparseHermitian};

#[derive(Debug, Clone, PartialEq)]
pub struct SeesawConfig {
    /// Number of outcomes K; `None` uses the ensemble size.
    pub outcomes: Option<usize>,
    pub restarts: usize,
    pub max_sweeps: usize,
    pub improvement_tolerance: f64,
    pub seed: u64,
    /// Settings of the POVM-step solves.
    pub settings: SolverSettings,
}

impl Default for SeesawConfig {
    fn default() -> Self {
        Self {
            outcomes: None,
            restarts: 10,
            max_sweeps: 200,
            improvement_tolerance: 1e-9,
            seed: 0,
            settings: SolverSettings::default(),
        }
    }
}

impl SeesawConfig {
    pub fn validate(&self) -> Result<()> {
        if self.outcomes == Some(0) {
            return Err(Error::Validation("seesaw needs at least one outcome".into()));
        }
        if self.restarts == 0 || self.max_sweeps == 0 {
            return Err(Error::Validation("restarts and max_sweeps must be positive".into()));
        }
        if !(self.improvement_tolerance > 0.0) {
            return Err(Error::Validation("improvement tolerance must be positive".into()));
        }
        self.settings.validate()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeesawResult {
    pub strategy: Strategy,
    /// average_fidelity of `strategy`.
    pub fidelity: f64,
    pub restarts: usize,
    /// Restart that produced the strategy.
    pub best_restart: usize,
    /// Sweeps run by the best restart.
    pub sweeps: usize,
    /// Whether the best restart stopped on the improvement tolerance rather
    /// than on `max_sweeps`.
    pub converged: bool,
}

fn check_povm(e: &Ensemble, povm: &[HermitianOperator]) -> Result<()> {
    if povm.is_empty() || povm.iter().any(|m| m.dim() != e.d_a()) {
        return Err(Error::Dimension(format!("POVM elements must act on C^{}", e.d_a())));
    }
    Ok(())
}

/// Σ_{i,x} p_i tr(Ψ'_i M_x) tr(φ_x Ψ_i).
fn fidelity(e: &Ensemble, povm: &[HermitianOperator], guesses: &[HermitianOperator]) -> Result<f64> {
    let mut f = 0.0;
    for it in e.items() {
        for (m, g) in povm.iter().zip(guesses) {
            f += it.prob * it.encoded.inner(m)? * g.inner(&it.target)?;
        }
    }
    Ok(f)
}

/// For each outcome the principal eigenvector of R_x = Σ_i p_i tr(Ψ'_i M_x) Ψ_i.
///
/// A vanishing R_x keeps the previous guess, or |0⟩ when there is none. The
/// previous guess is also kept when it already attains the top eigenvalue.
pub fn guess_update(
    p: &EstimationProblem,
    povm: &[HermitianOperator],
    previous: Option<&[HermitianOperator]>,
) -> Result<Vec<HermitianOperator>> {
    let e = p.require_ensemble()?;
    check_povm(e, povm)?;
    if previous.is_some_and(|prev| prev.len() != povm.len()) {
        return Err(Error::Validation("one previous guess per outcome is required".into()));
    }
    let d_b = e.d_b();
    povm.iter()
        .enumerate()
        .map(|(x, m)| {
            let mut r = ComplexMatrix::zeros(d_b, d_b);
            for it in e.items() {
                r.axpy(it.prob * it.encoded.inner(m)?, it.target.matrix());
            }
            let prev = previous.map(|g| &g[x]);
            if r.trace().re <= 1e-14 {
                return match prev {
                    Some(g) => Ok(g.clone()),
                    None => {
                        let mut ket = vec![Complex64::new(0.0, 0.0); d_b];
                        ket[0] = Complex64::new(1.0, 0.0);
                        HermitianOperator::projector(&ket)
                    }
                };
            }
            let eig = hermitian_eig_matrix(&r)?;
            let top = eig.values[d_b - 1];
            if let Some(g) = prev {
                if g.matrix().trace_product(&r).re >= top - 1e-15 * top.abs().max(1.0) {
                    return Ok(g.clone());
                }
            }
            HermitianOperator::projector(&eig.vectors.column(d_b - 1))
        })
        .collect()
}

/// Solves max Σ_x tr(M_x G_x) over POVMs with G_x = Σ_i p_i tr(φ_x Ψ_i) Ψ'_i,
/// then projects the solver output onto exact POVMs: negative eigenvalues
/// are clipped and the elements renormalized by T^{-1/2} with T = Σ_x M_x.
pub fn povm_update(
    p: &EstimationProblem,
    guesses: &[HermitianOperator],
    settings: &SolverSettings,
) -> Result<Vec<HermitianOperator>> {
    let e = p.require_ensemble()?;
    if guesses.is_empty() || guesses.iter().any(|g| g.dim() != e.d_b()) {
        return Err(Error::Dimension(format!("guesses must be states on C^{}", e.d_b())));
    }
    let d_a = e.d_a();
    let gs = guesses
        .iter()
        .map(|g| {
            let mut m = ComplexMatrix::zeros(d_a, d_a);
            for it in e.items() {
                m.axpy(it.prob * g.inner(&it.target)?, it.encoded.matrix());
            }
            Ok(m)
        })
        .collect::<Result<Vec<_>>>()?;
    let field = if gs.iter().all(|g| g.is_real(0.0)) { Field::Real } else { Field::Complex };

    let mut program = ConicProgram::new();
    for (x, g) in gs.iter().enumerate() {
        let b = program.add_block(format!("M{x}"), d_a, field);
        program.set_objective(b, SparseHermitian::from_dense(g)?)?;
        program.set_trace_cap(b, d_a as f64)?;
    }
    let half = Complex64::new(0.5, 0.0);
    let half_i = Complex64::new(0.0, 0.5);
    for i in 0..d_a {
        for j in i..d_a {
            let parts: &[(Complex64, f64)] = if i == j {
                &[(Complex64::new(1.0, 0.0), 1.0)]
            } else if field == Field::Real {
                &[(half, 0.0)]
            } else {
                &[(half, 0.0), (half_i, 0.0)]
            };
            for &(v, rhs) in parts {
                let terms = (0..gs.len())
                    .map(|b| Ok((b, SparseHermitian::new(d_a, [(i, j, v)])?)))
                    .collect::<Result<Vec<_>>>()?;
                program.add_equality(terms, rhs)?;
            }
        }
    }
    let sol = solve(&program, settings)?;
    normalize_povm(&sol.primal_blocks)
}

fn psd_part(m: &ComplexMatrix) -> Result<(ComplexMatrix, Vec<f64>, ComplexMatrix)> {
    let eig = hermitian_eig_matrix(&m.hermitian_part())?;
    let n = eig.values.len();
    let clipped: Vec<f64> = eig.values.iter().map(|v| v.max(0.0)).collect();
    let d = ComplexMatrix::from_fn(n, n, |i, j| {
        if i == j { Complex64::new(clipped[i], 0.0) } else { Complex64::new(0.0, 0.0) }
    });
    let out = eig.vectors.matmul(&d).matmul(&eig.vectors.adjoint());
    Ok((out, eig.values, eig.vectors))
}

fn normalize_povm(blocks: &[ComplexMatrix]) -> Result<Vec<HermitianOperator>> {
    let n = blocks[0].rows();
    let clipped = blocks.iter().map(|m| Ok(psd_part(m)?.0)).collect::<Result<Vec<_>>>()?;
    let mut total = ComplexMatrix::zeros(n, n);
    for m in &clipped {
        total += m;
    }
    let eig = hermitian_eig_matrix(&total.hermitian_part())?;
    if eig.values[0] <= 1e-12 {
        return Err(Error::Solver("POVM step returned a singular measurement".into()));
    }
    let inv_sqrt = ComplexMatrix::from_fn(n, n, |i, j| {
        if i == j { Complex64::new(eig.values[i].sqrt().recip(), 0.0) } else { Complex64::new(0.0, 0.0) }
    });
    let t = eig.vectors.matmul(&inv_sqrt).matmul(&eig.vectors.adjoint());
    clipped
        .iter()
        .map(|m| HermitianOperator::from_matrix(t.matmul(m).matmul(&t).hermitian_part()))
        .collect()
}

struct Run {
    povm: Vec<HermitianOperator>,
    guesses: Vec<HermitianOperator>,
    fidelity: f64,
    sweeps: usize,
    converged: bool,
}

fn run_restart(p: &EstimationProblem, c: &SeesawConfig, k: usize, restart: usize) -> Result<Run> {
    let e = p.require_ensemble()?;
    let mut rng = ChaCha8Rng::seed_from_u64(c.seed);
    rng.set_stream(restart as u64);
    let mut guesses = (0..k)
        .map(|_| HermitianOperator::projector(&random_ket(&mut rng, e.d_b())))
        .collect::<Result<Vec<_>>>()?;
    let mut povm = povm_update(p, &guesses, &c.settings)?;
    let mut f = fidelity(e, &povm, &guesses)?;
    let mut sweeps = 0;
    let mut converged = false;
    while sweeps < c.max_sweeps {
        sweeps += 1;
        let before = f;
        guesses = guess_update(p, &povm, Some(&guesses))?;
        f = fidelity(e, &povm, &guesses)?;
        let candidate = povm_update(p, &guesses, &c.settings)?;
        let fc = fidelity(e, &candidate, &guesses)?;
        if fc >= f {
            povm = candidate;
            f = fc;
        }
        if f - before < c.improvement_tolerance {
            converged = true;
            break;
        }
    }
    Ok(Run {
        povm,
        guesses,
        fidelity: f,
        sweeps,
        converged,
    })
}

/// Best strategy over independent seeded restarts. Restart r draws its
/// initial guesses from stream r of a ChaCha8 generator seeded with
/// `c.seed`; ties keep the lowest restart index.
pub fn seesaw_lower_bound(p: &EstimationProblem, c: &SeesawConfig) -> Result<SeesawResult> {
    c.validate()?;
    let e = p.require_ensemble()?;
    let k = c.outcomes.unwrap_or(e.len());
    let runs = (0..c.restarts)
        .into_par_iter()
        .map(|r| run_restart(p, c, k, r))
        .collect::<Result<Vec<_>>>()?;
    let mut best = 0;
    for (r, run) in runs.iter().enumerate() {
        if run.fidelity > runs[best].fidelity {
            best = r;
        }
    }
    let run = &runs[best];
    let strategy = Strategy::new(
        run.povm
            .iter()
            .zip(&run.guesses)
            .map(|(m, g)| StrategyOutcome {
                povm_element: m.clone(),
                guess: g.clone(),
            })
            .collect(),
    )?;
    let fidelity = average_fidelity(p, &strategy)?;
    Ok(SeesawResult {
        strategy,
        fidelity,
        restarts: c.restarts,
        best_restart: best,
        sweeps: run.sweeps,
        converged: run.converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::random::{random_ket, random_simplex};
    use crate::problems::{bell_problem, build_problem, discrimination_problem, isotropic_problem, two_state_problem};

    fn ket(v: &[f64]) -> Vec<Complex64> {
        v.iter().map(|&x| Complex64::new(x, 0.0)).collect()
    }

    fn quick() -> SeesawConfig {
        SeesawConfig {
            restarts: 3,
            ..SeesawConfig::default()
        }
    }

    #[test]
    fn single_state_reaches_one() {
        let k = ket(&[0.6, 0.8]);
        let p = build_problem(&Ensemble::from_kets(&[1.0], &[k.clone()], &[k]).unwrap()).unwrap();
        let r = seesaw_lower_bound(&p, &quick()).unwrap();
        assert!((r.fidelity - 1.0).abs() <= 1e-9);
        let g = guess_update(&p, &[HermitianOperator::identity(vec![2])], None).unwrap();
        assert!((g[0].inner(&p.ensemble().unwrap().items()[0].target).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn diagonal_guess_is_computational_state() {
        let p0 = HermitianOperator::projector(&ket(&[1.0, 0.0])).unwrap();
        let plus = HermitianOperator::projector(&ket(&[0.8, 0.6])).unwrap();
        let p = build_problem(&discrimination_problem(&[0.3, 0.7], &[p0, plus]).unwrap()).unwrap();
        let g = guess_update(&p, &[HermitianOperator::identity(vec![2])], None).unwrap();
        assert!((g[0].matrix()[(1, 1)].re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_outcome_forces_identity() {
        let p = two_state_problem(0.6, 0.5).unwrap();
        let g = HermitianOperator::projector(&ket(&[1.0, 0.0])).unwrap();
        let m = povm_update(&p, &[g], &SolverSettings::default()).unwrap();
        assert!((m[0].matrix() - &ComplexMatrix::identity(2)).max_abs() < 1e-9);
    }

    #[test]
    fn helstrom_value() {
        let p = two_state_problem(0.6, 0.5).unwrap();
        let r = seesaw_lower_bound(&p, &quick()).unwrap();
        assert!((r.fidelity - 0.9).abs() <= 1e-6, "{}", r.fidelity);
        let guesses: Vec<_> = p.ensemble().unwrap().items().iter().map(|it| it.target.clone()).collect();
        let m = povm_update(&p, &guesses, &SolverSettings::default()).unwrap();
        let f = fidelity(p.ensemble().unwrap(), &m, &guesses).unwrap();
        assert!((f - 0.9).abs() <= 1e-6);
    }

    #[test]
    fn bell_is_globally_distinguishable() {
        let p = build_problem(&bell_problem(&[0.4, 0.3, 0.2, 0.1]).unwrap()).unwrap();
        let r = seesaw_lower_bound(&p, &quick()).unwrap();
        assert!((r.fidelity - 1.0).abs() <= 1e-6, "{}", r.fidelity);
    }

    #[test]
    fn symbolic_problems_are_refused() {
        let p = isotropic_problem(2).unwrap();
        assert!(matches!(seesaw_lower_bound(&p, &quick()), Err(Error::Symbolic(_))));
    }

    #[test]
    fn guess_update_never_decreases_fidelity() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let probs = random_simplex(&mut rng, 3);
            let kets: Vec<_> = (0..3).map(|_| random_ket(&mut rng, 2)).collect();
            let p = build_problem(&Ensemble::from_kets(&probs, &kets, &kets).unwrap()).unwrap();
            let e = p.ensemble().unwrap();
            let v = random_ket(&mut rng, 2);
            let proj = HermitianOperator::projector(&v).unwrap();
            let povm = vec![proj.clone(), HermitianOperator::identity(vec![2]).sub(&proj).unwrap()];
            let old: Vec<_> = (0..2)
                .map(|_| HermitianOperator::projector(&random_ket(&mut rng, 2)).unwrap())
                .collect();
            let new = guess_update(&p, &povm, Some(&old)).unwrap();
            assert!(fidelity(e, &povm, &new).unwrap() >= fidelity(e, &povm, &old).unwrap() - 1e-12);
        }
    }

    #[test]
    fn seeded_runs_are_identical() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let kets: Vec<_> = (0..3).map(|_| random_ket(&mut rng, 2)).collect();
        let p = build_problem(&Ensemble::from_kets(&[0.5, 0.3, 0.2], &kets, &kets).unwrap()).unwrap();
        let c = SeesawConfig { seed: 42, ..quick() };
        let a = seesaw_lower_bound(&p, &c).unwrap();
        let b = seesaw_lower_bound(&p, &c).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.fidelity.to_bits(), b.fidelity.to_bits());
    }
}
