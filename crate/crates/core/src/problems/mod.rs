//! Estimation problems: ensembles of encoded states with pure targets, the
//! joint operator ρ = Σ_i p_i Ψ'_i ⊗ Ψ_i, and measure-and-prepare strategies.

mod families;

pub use families::{
    bell_kets, bell_problem, bell_states, copies_problem, copies_problem_with_cap, discrimination_problem,
    domino_kets, domino_problem, isotropic_problem, two_state_problem, werner_operator, DEFAULT_COPIES_CAP,
};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, HermitianOperator};

const STATE_TOLERANCE: f64 = 1e-9;
const PSD_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleItem {
    pub prob: f64,
    /// Pure target Ψ_i on C^{d_B}.
    pub target: HermitianOperator,
    /// Encoded density operator Ψ'_i on C^{d_A}.
    pub encoded: HermitianOperator,
}

/// A finite ensemble (p_i, Ψ_i, Ψ'_i).
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    items: Vec<EnsembleItem>,
    encoded_dims: Vec<usize>,
    d_b: usize,
}

impl Ensemble {
    /// Validates the items; the encoded factor structure is taken from the
    /// first encoded operator.
    pub fn new(items: Vec<EnsembleItem>) -> Result<Self> {
        let first = items
            .first()
            .ok_or_else(|| Error::Validation("ensemble has no items".into()))?;
        let encoded_dims = first.encoded.dims().to_vec();
        let d_a = first.encoded.dim();
        let d_b = first.target.dim();
        let mut total = 0.0;
        for (i, item) in items.iter().enumerate() {
            let fail = |what: String| Error::Validation(format!("item {i}: {what}"));
            if !(item.prob >= 0.0 && item.prob <= 1.0) {
                return Err(fail(format!("probability {} outside [0, 1]", item.prob)));
            }
            total += item.prob;
            if item.encoded.dim() != d_a || item.target.dim() != d_b {
                return Err(fail("dimension differs from the first item".into()));
            }
            let t_trace = item.target.trace();
            if (t_trace - 1.0).abs() > STATE_TOLERANCE || (item.target.purity() - 1.0).abs() > STATE_TOLERANCE {
                return Err(fail("target is not a pure state".into()));
            }
            if (item.encoded.trace() - 1.0).abs() > STATE_TOLERANCE {
                return Err(fail(format!("encoded state has trace {}", item.encoded.trace())));
            }
            let lmin = item.encoded.min_eigenvalue()?;
            if lmin < -STATE_TOLERANCE {
                return Err(fail(format!("encoded state has eigenvalue {lmin}")));
            }
        }
        if (total - 1.0).abs() > STATE_TOLERANCE {
            return Err(Error::Validation(format!("probabilities sum to {total}")));
        }
        Ok(Self {
            items,
            encoded_dims,
            d_b,
        })
    }

    /// Convenience constructor from kets: targets and encodings are pure.
    pub fn from_kets(probs: &[f64], targets: &[Vec<Complex64>], encoded: &[Vec<Complex64>]) -> Result<Self> {
        if probs.len() != targets.len() || probs.len() != encoded.len() {
            return Err(Error::Validation("probabilities, targets and encodings differ in count".into()));
        }
        let items = probs
            .iter()
            .zip(targets.iter().zip(encoded))
            .map(|(&prob, (t, e))| {
                Ok(EnsembleItem {
                    prob,
                    target: HermitianOperator::projector(t)?,
                    encoded: HermitianOperator::projector(e)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(items)
    }

    pub fn items(&self) -> &[EnsembleItem] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Total encoded dimension d_A.
    pub fn d_a(&self) -> usize {
        self.encoded_dims.iter().product()
    }

    /// Target dimension d_B.
    pub fn d_b(&self) -> usize {
        self.d_b
    }

    /// Tensor factors of the encoded space.
    pub fn encoded_dims(&self) -> &[usize] {
        &self.encoded_dims
    }

    /// Relabels the encoded space as a product of `dims`.
    pub fn with_encoded_dims(&self, dims: Vec<usize>) -> Result<Self> {
        if dims.iter().product::<usize>() != self.d_a() {
            return Err(Error::Dimension(format!(
                "encoded dimension {} does not factor as {dims:?}",
                self.d_a()
            )));
        }
        let items = self
            .items
            .iter()
            .map(|it| {
                Ok(EnsembleItem {
                    prob: it.prob,
                    target: it.target.clone(),
                    encoded: it.encoded.clone().with_dims(dims.clone())?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            items,
            encoded_dims: dims,
            d_b: self.d_b,
        })
    }

    /// Σ_i p_i Ψ'_i ⊗ Ψ_i with dims `encoded_dims ++ [d_B]`.
    pub fn joint_operator(&self) -> HermitianOperator {
        let mut dims = self.encoded_dims.clone();
        dims.push(self.d_b);
        let n = self.d_a() * self.d_b;
        let mut m = ComplexMatrix::zeros(n, n);
        for it in &self.items {
            if it.prob == 0.0 {
                continue;
            }
            m.axpy(it.prob, &it.encoded.matrix().kron(it.target.matrix()));
        }
        HermitianOperator::new(dims, m).expect("sum of Hermitian products")
    }
}

/// Where a problem's ρ comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum ProblemSource {
    Finite(Ensemble),
    /// A continuous family known only through its closed-form ρ.
    Symbolic { family: String, dim: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimationProblem {
    source: ProblemSource,
    rho: HermitianOperator,
}

impl EstimationProblem {
    pub(crate) fn symbolic(family: &str, dim: usize, rho: HermitianOperator) -> Self {
        Self {
            source: ProblemSource::Symbolic {
                family: family.to_string(),
                dim,
            },
            rho,
        }
    }

    pub fn source(&self) -> &ProblemSource {
        &self.source
    }

    pub fn ensemble(&self) -> Option<&Ensemble> {
        match &self.source {
            ProblemSource::Finite(e) => Some(e),
            ProblemSource::Symbolic { .. } => None,
        }
    }

    /// The finite ensemble, or an error naming the symbolic family.
    pub fn require_ensemble(&self) -> Result<&Ensemble> {
        match &self.source {
            ProblemSource::Finite(e) => Ok(e),
            ProblemSource::Symbolic { family, .. } => Err(Error::Symbolic(family.clone())),
        }
    }

    /// ρ with dims [d_A, d_B].
    pub fn rho(&self) -> &HermitianOperator {
        &self.rho
    }

    pub fn d_a(&self) -> usize {
        self.rho.dims()[0]
    }

    pub fn d_b(&self) -> usize {
        self.rho.dims()[1]
    }
}

/// Builds ρ = Σ_i p_i Ψ'_i ⊗ Ψ_i on C^{d_A} ⊗ C^{d_B}.
pub fn build_problem(e: &Ensemble) -> Result<EstimationProblem> {
    let rho = e.joint_operator().with_dims(vec![e.d_a(), e.d_b()])?;
    Ok(EstimationProblem {
        source: ProblemSource::Finite(e.clone()),
        rho,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct StrategyOutcome {
    /// POVM element M_x on the encoded space.
    pub povm_element: HermitianOperator,
    /// Pure guess φ_x on the target space.
    pub guess: HermitianOperator,
}

/// A measure-and-prepare strategy (M_x, φ_x).
#[derive(Debug, Clone, PartialEq)]
pub struct Strategy {
    outcomes: Vec<StrategyOutcome>,
}

impl Strategy {
    pub fn new(outcomes: Vec<StrategyOutcome>) -> Result<Self> {
        let first = outcomes
            .first()
            .ok_or_else(|| Error::Validation("strategy has no outcomes".into()))?;
        let d_a = first.povm_element.dim();
        let d_b = first.guess.dim();
        let mut total = ComplexMatrix::zeros(d_a, d_a);
        for (x, o) in outcomes.iter().enumerate() {
            if o.povm_element.dim() != d_a || o.guess.dim() != d_b {
                return Err(Error::Validation(format!("outcome {x}: dimension mismatch")));
            }
            let lmin = o.povm_element.min_eigenvalue()?;
            if lmin < -PSD_TOLERANCE {
                return Err(Error::Validation(format!("outcome {x}: POVM element has eigenvalue {lmin}")));
            }
            if (o.guess.trace() - 1.0).abs() > STATE_TOLERANCE || (o.guess.purity() - 1.0).abs() > STATE_TOLERANCE {
                return Err(Error::Validation(format!("outcome {x}: guess is not a pure state")));
            }
            total += o.povm_element.matrix();
        }
        let dev = (&total - &ComplexMatrix::identity(d_a)).max_abs();
        if dev > STATE_TOLERANCE {
            return Err(Error::Validation(format!("POVM elements sum to the identity only within {dev:.3e}")));
        }
        Ok(Self { outcomes })
    }

    pub fn outcomes(&self) -> &[StrategyOutcome] {
        &self.outcomes
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    pub fn d_a(&self) -> usize {
        self.outcomes[0].povm_element.dim()
    }

    pub fn d_b(&self) -> usize {
        self.outcomes[0].guess.dim()
    }
}

/// Λ = Σ_x M_x ⊗ φ_x with dims [d_A, d_B].
pub fn strategy_operator(s: &Strategy) -> HermitianOperator {
    let (d_a, d_b) = (s.d_a(), s.d_b());
    let mut m = ComplexMatrix::zeros(d_a * d_b, d_a * d_b);
    for o in s.outcomes() {
        m += &o.povm_element.matrix().kron(o.guess.matrix());
    }
    HermitianOperator::new(vec![d_a, d_b], m).expect("sum of Hermitian products")
}

fn check_dims(p: &EstimationProblem, s: &Strategy) -> Result<()> {
    if p.d_a() != s.d_a() || p.d_b() != s.d_b() {
        return Err(Error::Dimension(format!(
            "strategy on {}x{} applied to a {}x{} problem",
            s.d_a(),
            s.d_b(),
            p.d_a(),
            p.d_b()
        )));
    }
    Ok(())
}

/// Average fidelity Σ_{i,x} p_i tr(Ψ'_i M_x) tr(φ_x Ψ_i).
///
/// Symbolic problems are evaluated as tr(ρ Λ).
pub fn average_fidelity(p: &EstimationProblem, s: &Strategy) -> Result<f64> {
    check_dims(p, s)?;
    match p.ensemble() {
        Some(e) => {
            let mut f = 0.0;
            for it in e.items() {
                for o in s.outcomes() {
                    f += it.prob * it.encoded.inner(&o.povm_element)? * o.guess.inner(&it.target)?;
                }
            }
            Ok(f)
        }
        None => operator_fidelity(p, s),
    }
}

/// tr(ρ Λ) with Λ the strategy operator.
pub fn operator_fidelity(p: &EstimationProblem, s: &Strategy) -> Result<f64> {
    check_dims(p, s)?;
    Ok(p.rho().matrix().trace_product(strategy_operator(s).matrix()).re)
}
