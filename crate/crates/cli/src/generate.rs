//! Built-in problem families, emitted as documents.

use clap::ValueEnum;
use fidelity_core::problems::{bell_kets, domino_kets};
use num_complex::Complex64;

use crate::document::{ket_data, Dims, Kind, ProblemDocument, StateRecord, Symbolic, SCHEMA_VERSION};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Family {
    Isotropic,
    Bell,
    Domino,
    TwoPure,
    Copies,
}

/// Parameters shared by the generators; unset values take family defaults.
#[derive(Debug, Clone, Default)]
pub struct GeneratorParams {
    pub dim: Option<usize>,
    pub probs: Option<Vec<f64>>,
    pub overlap: Option<f64>,
    pub copies: Option<usize>,
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn basis(d: usize, i: usize) -> Vec<Complex64> {
    let mut v = vec![c(0.0); d];
    v[i] = c(1.0);
    v
}

fn overlap_ket(overlap: f64) -> Result<Vec<Complex64>, CliError> {
    if !(0.0..=1.0).contains(&overlap) {
        return Err(CliError::Input(format!("overlap {overlap} outside [0, 1]")));
    }
    Ok(vec![c(overlap), c((1.0 - overlap * overlap).max(0.0).sqrt())])
}

fn probs_or(params: &GeneratorParams, n: usize) -> Result<Vec<f64>, CliError> {
    let p = params.probs.clone().unwrap_or_else(|| vec![1.0 / n as f64; n]);
    if p.len() != n {
        return Err(CliError::Input(format!("expected {n} probabilities, got {}", p.len())));
    }
    Ok(p)
}

fn records(probs: &[f64], targets: &[Vec<Complex64>], encoded: &[Vec<Complex64>]) -> Vec<StateRecord> {
    probs
        .iter()
        .zip(targets.iter().zip(encoded))
        .map(|(&prob, (t, e))| StateRecord {
            prob,
            target: ket_data(t),
            encoded: ket_data(e),
        })
        .collect()
}

fn document(name: String, kind: Kind, encoded: Vec<usize>, target: usize, states: Vec<StateRecord>) -> ProblemDocument {
    ProblemDocument {
        schema_version: SCHEMA_VERSION,
        name,
        kind,
        dims: Dims { encoded, target },
        states,
        symbolic: None,
    }
}

pub fn generate(family: Family, params: &GeneratorParams) -> Result<ProblemDocument, CliError> {
    match family {
        Family::Isotropic => {
            let d = params.dim.unwrap_or(2);
            Ok(ProblemDocument {
                symbolic: Some(Symbolic {
                    family: "isotropic".into(),
                    dim: d,
                }),
                ..document(format!("isotropic-{d}"), Kind::Global, vec![d], d, Vec::new())
            })
        }
        Family::Bell => {
            let probs = probs_or(params, 4)?;
            let kets = bell_kets();
            Ok(document("bell".into(), Kind::Local, vec![2, 2], 4, records(&probs, &kets, &kets)))
        }
        Family::Domino => {
            let kets = domino_kets();
            let probs = probs_or(params, kets.len())?;
            Ok(document("domino".into(), Kind::Local, vec![3, 3], 9, records(&probs, &kets, &kets)))
        }
        Family::TwoPure => {
            let overlap = params.overlap.unwrap_or(0.6);
            let probs = probs_or(params, 2)?;
            let encoded = vec![basis(2, 0), overlap_ket(overlap)?];
            let targets = vec![basis(2, 0), basis(2, 1)];
            Ok(document(
                format!("two-pure-{overlap}"),
                Kind::Global,
                vec![2],
                2,
                records(&probs, &targets, &encoded),
            ))
        }
        Family::Copies => {
            let n = params.copies.unwrap_or(2);
            if n == 0 {
                return Err(CliError::Input("at least one copy is required".into()));
            }
            let overlap = params.overlap.unwrap_or(std::f64::consts::FRAC_1_SQRT_2);
            let probs = probs_or(params, 2)?;
            let targets = vec![basis(2, 0), overlap_ket(overlap)?];
            let encoded: Vec<Vec<Complex64>> = targets
                .iter()
                .map(|t| {
                    (1..n).fold(t.clone(), |acc, _| {
                        acc.iter().flat_map(|x| t.iter().map(move |y| x * y)).collect()
                    })
                })
                .collect();
            Ok(document(
                format!("copies-{n}"),
                Kind::Global,
                vec![2; n],
                2,
                records(&probs, &targets, &encoded),
            ))
        }
    }
}
