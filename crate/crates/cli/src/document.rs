//! Problem documents: JSON ensembles with complex numbers as [re, im] pairs.

use fidelity_core::hierarchy::{build_local_problem, LocalEstimationProblem};
use fidelity_core::linalg::{ComplexMatrix, HermitianOperator};
use fidelity_core::problems::{build_problem, isotropic_problem, Ensemble, EnsembleItem, EstimationProblem};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;
const NORM_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Global,
    Local,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Dims {
    /// Factors of the encoded space; for local problems, one per party.
    pub encoded: Vec<usize>,
    /// Target dimension (d_B, or d_C for local problems).
    pub target: usize,
}

/// A pure state as a ket, or any state as a row-major matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StateData {
    Ket(Vec<[f64; 2]>),
    Matrix(Vec<Vec<[f64; 2]>>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateRecord {
    pub prob: f64,
    pub target: StateData,
    pub encoded: StateData,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Symbolic {
    pub family: String,
    pub dim: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemDocument {
    pub schema_version: u32,
    pub name: String,
    pub kind: Kind,
    pub dims: Dims,
    #[serde(default)]
    pub states: Vec<StateRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub symbolic: Option<Symbolic>,
}

pub fn ket_data(ket: &[Complex64]) -> StateData {
    StateData::Ket(ket.iter().map(|z| [z.re, z.im]).collect())
}

fn complex(pair: &[f64; 2]) -> Complex64 {
    Complex64::new(pair[0], pair[1])
}

fn input(msg: String) -> CliError {
    CliError::Input(msg)
}

impl StateData {
    fn to_operator(&self, dim: usize, what: &str) -> Result<HermitianOperator, CliError> {
        match self {
            StateData::Ket(v) => {
                if v.len() != dim {
                    return Err(input(format!("{what}: ket has length {}, expected {dim}", v.len())));
                }
                let ket: Vec<Complex64> = v.iter().map(complex).collect();
                let norm = ket.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                if !((norm - 1.0).abs() <= NORM_TOLERANCE) {
                    return Err(input(format!("{what}: ket norm {norm} is not within {NORM_TOLERANCE} of 1")));
                }
                Ok(HermitianOperator::projector(&ket)?)
            }
            StateData::Matrix(rows) => {
                if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
                    return Err(input(format!("{what}: matrix is not {dim}x{dim}")));
                }
                let m = ComplexMatrix::from_fn(dim, dim, |i, j| complex(&rows[i][j]));
                Ok(HermitianOperator::new(vec![dim], m)?)
            }
        }
    }
}

/// A parsed document: what the subcommands operate on.
#[derive(Debug, Clone)]
pub enum Problem {
    Finite(Ensemble),
    Symbolic(EstimationProblem),
}

impl ProblemDocument {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let doc: ProblemDocument =
            serde_json::from_str(text).map_err(|e| input(format!("malformed problem document: {e}")))?;
        if doc.schema_version != SCHEMA_VERSION {
            return Err(input(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                doc.schema_version
            )));
        }
        Ok(doc)
    }

    pub fn to_problem(&self) -> Result<Problem, CliError> {
        if self.dims.encoded.is_empty() || self.dims.encoded.contains(&0) || self.dims.target == 0 {
            return Err(input(format!("invalid dims {:?}", self.dims)));
        }
        if self.kind == Kind::Local && self.dims.encoded.len() < 2 {
            return Err(input("a local problem needs at least two parties".into()));
        }
        let d_a: usize = self.dims.encoded.iter().product();
        if let Some(s) = &self.symbolic {
            if !self.states.is_empty() {
                return Err(input("a symbolic problem carries no states".into()));
            }
            if s.family != "isotropic" {
                return Err(input(format!("unknown symbolic family {:?}", s.family)));
            }
            if self.kind != Kind::Global || self.dims.encoded != [s.dim] || self.dims.target != s.dim {
                return Err(input("isotropic problems are global with d_A = d_B = dim".into()));
            }
            return Ok(Problem::Symbolic(isotropic_problem(s.dim)?));
        }
        if self.states.is_empty() {
            return Err(input("problem has no states".into()));
        }
        let items = self
            .states
            .iter()
            .enumerate()
            .map(|(i, s)| {
                Ok(EnsembleItem {
                    prob: s.prob,
                    target: s.target.to_operator(self.dims.target, &format!("state {i} target"))?,
                    encoded: s.encoded.to_operator(d_a, &format!("state {i} encoded"))?,
                })
            })
            .collect::<Result<Vec<_>, CliError>>()?;
        let mut e = Ensemble::new(items)?;
        if self.dims.encoded.len() > 1 {
            e = e.with_encoded_dims(self.dims.encoded.clone())?;
        }
        Ok(Problem::Finite(e))
    }

    pub fn global_problem(&self) -> Result<EstimationProblem, CliError> {
        match self.to_problem()? {
            Problem::Finite(e) => Ok(build_problem(&e)?),
            Problem::Symbolic(p) => Ok(p),
        }
    }

    pub fn local_problem(&self) -> Result<LocalEstimationProblem, CliError> {
        if self.kind != Kind::Local {
            return Err(input(format!("document {:?} is not a local problem", self.name)));
        }
        match self.to_problem()? {
            Problem::Finite(e) => Ok(build_local_problem(&e, &self.dims.encoded)?),
            Problem::Symbolic(_) => Err(input("symbolic problems are global".into())),
        }
    }
}
