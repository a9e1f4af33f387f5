use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{min_eigenvalue_matrix, ComplexMatrix, ZERO};

/// Number field of a PSD block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Field {
    /// Real symmetric block; imaginary parts of coefficients are ignored.
    Real,
    /// Complex Hermitian block.
    Complex,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockSpec {
    pub name: String,
    pub side: usize,
    pub field: Field,
}

/// Sparse Hermitian coefficient operator.
///
/// Only the upper triangle is stored; an entry `(i, j, v)` with `i < j`
/// stands for `v` at `(i, j)` and `conj(v)` at `(j, i)`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SparseHermitian {
    side: usize,
    entries: Vec<(usize, usize, Complex64)>,
}

impl SparseHermitian {
    /// Entries below the diagonal are mirrored into the upper triangle and
    /// duplicates are summed.
    pub fn new(side: usize, entries: impl IntoIterator<Item = (usize, usize, Complex64)>) -> Result<Self> {
        let mut list: Vec<(usize, usize, Complex64)> = Vec::new();
        for (i, j, v) in entries {
            if i >= side || j >= side {
                return Err(Error::Program(format!(
                    "entry ({i}, {j}) outside a {side}x{side} operator"
                )));
            }
            let (i, j, v) = if i <= j { (i, j, v) } else { (j, i, v.conj()) };
            if i == j && v.im.abs() > 1e-12 * v.norm().max(1.0) {
                return Err(Error::Program(format!(
                    "diagonal entry ({i}, {i}) has imaginary part {}",
                    v.im
                )));
            }
            let v = if i == j { Complex64::new(v.re, 0.0) } else { v };
            list.push((i, j, v));
        }
        list.sort_by_key(|a| (a.0, a.1));
        let mut merged: Vec<(usize, usize, Complex64)> = Vec::with_capacity(list.len());
        for (i, j, v) in list {
            match merged.last_mut() {
                Some(last) if last.0 == i && last.1 == j => last.2 += v,
                _ => merged.push((i, j, v)),
            }
        }
        merged.retain(|e| e.2 != ZERO);
        Ok(Self {
            side,
            entries: merged,
        })
    }

    pub fn zero(side: usize) -> Self {
        Self {
            side,
            entries: Vec::new(),
        }
    }

    /// Upper triangle of a dense Hermitian matrix.
    pub fn from_dense(m: &ComplexMatrix) -> Result<Self> {
        let deviation = m.hermitian_deviation();
        if deviation > crate::linalg::HERMITIAN_TOLERANCE {
            return Err(Error::NotHermitian { deviation });
        }
        let n = m.rows();
        let mut entries = Vec::new();
        for i in 0..n {
            for j in i..n {
                let v = if i == j {
                    Complex64::new(m[(i, i)].re, 0.0)
                } else {
                    (m[(i, j)] + m[(j, i)].conj()) * 0.5
                };
                if v != ZERO {
                    entries.push((i, j, v));
                }
            }
        }
        Ok(Self { side: n, entries })
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn entries(&self) -> &[(usize, usize, Complex64)] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn to_dense(&self) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(self.side, self.side);
        self.add_to_dense(&mut m, 1.0);
        m
    }

    /// `m += scale * self`.
    pub fn add_to_dense(&self, m: &mut ComplexMatrix, scale: f64) {
        for &(i, j, v) in &self.entries {
            m[(i, j)] += v * scale;
            if i != j {
                m[(j, i)] += v.conj() * scale;
            }
        }
    }

    /// tr(self · x) for Hermitian `x`.
    pub fn inner(&self, x: &ComplexMatrix) -> f64 {
        self.entries
            .iter()
            .map(|&(i, j, v)| {
                if i == j {
                    v.re * x[(i, i)].re
                } else {
                    2.0 * (v.conj() * x[(i, j)]).re
                }
            })
            .sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries
            .iter()
            .map(|&(i, j, v)| if i == j { v.norm_sqr() } else { 2.0 * v.norm_sqr() })
            .sum::<f64>()
            .sqrt()
    }

    /// Image under H ↦ [[Re H, −Im H], [Im H, Re H]].
    fn real_embedding(&self) -> Self {
        let n = self.side;
        let mut entries = Vec::with_capacity(4 * self.entries.len());
        for &(i, j, v) in &self.entries {
            let re = Complex64::new(v.re, 0.0);
            entries.push((i, j, re));
            entries.push((n + i, n + j, re));
            if i != j {
                entries.push((i, n + j, Complex64::new(-v.im, 0.0)));
                entries.push((j, n + i, Complex64::new(v.im, 0.0)));
            }
        }
        Self::new(2 * n, entries).expect("embedding stays in range")
    }
}

/// One linear equality Σ_b tr(A_b X_b) = rhs.
#[derive(Debug, Clone, PartialEq)]
pub struct Equality {
    pub terms: Vec<(usize, SparseHermitian)>,
    pub rhs: f64,
}

/// Semidefinite program in the form
///
/// ```text
/// maximize   Σ_b tr(C_b X_b)
/// subject to Σ_b tr(A_kb X_b) = b_k   for every equality k
///            X_b ⪰ 0                  for every block b
/// ```
///
/// Its dual is `minimize b·y subject to S_b = Σ_k y_k A_kb − C_b ⪰ 0`.
/// Read against the LMI form "minimize c·x subject to F_0 + Σ x_i F_i ⪰ 0",
/// the equality coefficients A_k play the role of the F_i, the right-hand
/// sides b_k that of c, and the primal blocks X_b that of the dual matrix Z.
#[derive(Debug, Clone, Default)]
pub struct ConicProgram {
    blocks: Vec<BlockSpec>,
    objective: Vec<SparseHermitian>,
    equalities: Vec<Equality>,
    trace_caps: Vec<Option<f64>>,
}

impl ConicProgram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_block(&mut self, name: impl Into<String>, side: usize, field: Field) -> usize {
        self.blocks.push(BlockSpec {
            name: name.into(),
            side,
            field,
        });
        self.objective.push(SparseHermitian::zero(side));
        self.trace_caps.push(None);
        self.blocks.len() - 1
    }

    pub fn set_objective(&mut self, block: usize, c: SparseHermitian) -> Result<()> {
        self.check_conformal(block, &c)?;
        self.objective[block] = c;
        Ok(())
    }

    pub fn add_equality(&mut self, terms: Vec<(usize, SparseHermitian)>, rhs: f64) -> Result<()> {
        for (b, a) in &terms {
            self.check_conformal(*b, a)?;
        }
        if !rhs.is_finite() {
            return Err(Error::Program("non-finite right-hand side".into()));
        }
        self.equalities.push(Equality { terms, rhs });
        Ok(())
    }

    /// Records the exact trace every feasible X_b must have.
    pub fn set_trace_cap(&mut self, block: usize, cap: f64) -> Result<()> {
        if block >= self.blocks.len() || !(cap >= 0.0) {
            return Err(Error::Program(format!("invalid trace cap {cap} for block {block}")));
        }
        self.trace_caps[block] = Some(cap);
        Ok(())
    }

    fn check_conformal(&self, block: usize, op: &SparseHermitian) -> Result<()> {
        let blk = self
            .blocks
            .get(block)
            .ok_or_else(|| Error::Program(format!("no block with index {block}")))?;
        if op.side() != blk.side {
            return Err(Error::Program(format!(
                "operator of side {} used on block `{}` of side {}",
                op.side(),
                blk.name,
                blk.side
            )));
        }
        Ok(())
    }

    pub fn blocks(&self) -> &[BlockSpec] {
        &self.blocks
    }

    pub fn objective(&self, block: usize) -> &SparseHermitian {
        &self.objective[block]
    }

    pub fn equalities(&self) -> &[Equality] {
        &self.equalities
    }

    pub fn trace_cap(&self, block: usize) -> Option<f64> {
        self.trace_caps[block]
    }

    pub fn trace_caps(&self) -> &[Option<f64>] {
        &self.trace_caps
    }

    pub fn validate(&self) -> Result<()> {
        if self.blocks.is_empty() {
            return Err(Error::Program("program has no blocks".into()));
        }
        if let Some(b) = self.blocks.iter().find(|b| b.side == 0) {
            return Err(Error::Program(format!("block `{}` has side 0", b.name)));
        }
        for (k, eq) in self.equalities.iter().enumerate() {
            for (b, a) in &eq.terms {
                self.check_conformal(*b, a)
                    .map_err(|e| Error::Program(format!("equality {k}: {e}")))?;
            }
        }
        Ok(())
    }

    /// Σ_b tr(C_b X_b).
    pub fn objective_value(&self, x: &[ComplexMatrix]) -> f64 {
        self.objective.iter().zip(x).map(|(c, xb)| c.inner(xb)).sum()
    }

    /// S_b = Σ_k y_k A_kb − C_b, evaluated densely.
    pub fn dual_slacks(&self, y: &[f64]) -> Vec<ComplexMatrix> {
        let mut s: Vec<ComplexMatrix> = self
            .blocks
            .iter()
            .zip(&self.objective)
            .map(|(blk, c)| {
                let mut m = ComplexMatrix::zeros(blk.side, blk.side);
                c.add_to_dense(&mut m, -1.0);
                m
            })
            .collect();
        for (eq, &yk) in self.equalities.iter().zip(y) {
            if yk == 0.0 {
                continue;
            }
            for (b, a) in &eq.terms {
                a.add_to_dense(&mut s[*b], yk);
            }
        }
        for (blk, m) in self.blocks.iter().zip(s.iter_mut()) {
            if blk.field == Field::Real {
                for z in m.as_mut_slice() {
                    z.im = 0.0;
                }
            }
        }
        s
    }

    /// The same program over real symmetric blocks of twice the side, with
    /// every coefficient embedded as [[Re H, −Im H], [Im H, Re H]] and every
    /// right-hand side and trace cap doubled. Optimal values double.
    pub fn real_embedding(&self) -> Self {
        let mut out = Self::new();
        for (blk, cap) in self.blocks.iter().zip(&self.trace_caps) {
            let b = out.add_block(format!("{}:real", blk.name), 2 * blk.side, Field::Real);
            if let Some(cap) = cap {
                out.trace_caps[b] = Some(2.0 * cap);
            }
        }
        for (b, c) in self.objective.iter().enumerate() {
            out.objective[b] = self.real_operator(b, c).real_embedding();
        }
        for eq in &self.equalities {
            let terms = eq
                .terms
                .iter()
                .map(|(b, a)| (*b, self.real_operator(*b, a).real_embedding()))
                .collect();
            out.equalities.push(Equality {
                terms,
                rhs: 2.0 * eq.rhs,
            });
        }
        out
    }

    fn real_operator(&self, block: usize, a: &SparseHermitian) -> SparseHermitian {
        if self.blocks[block].field == Field::Real {
            SparseHermitian {
                side: a.side,
                entries: a
                    .entries
                    .iter()
                    .map(|&(i, j, v)| (i, j, Complex64::new(v.re, 0.0)))
                    .filter(|e| e.2 != ZERO)
                    .collect(),
            }
        } else {
            a.clone()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverSettings {
    pub feasibility_tolerance: f64,
    pub gap_tolerance: f64,
    pub max_iterations: usize,
    /// 0 silent, 1 summary, 2 per-iteration log on stderr.
    pub verbosity: u8,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            feasibility_tolerance: 1e-8,
            gap_tolerance: 1e-8,
            max_iterations: 200,
            verbosity: 0,
        }
    }
}

impl SolverSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.feasibility_tolerance > 0.0) || !(self.gap_tolerance > 0.0) {
            return Err(Error::Program("solver tolerances must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Optimal,
    MaxIterations,
    InfeasibleDetected,
    UnboundedDetected,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Optimal => "optimal",
            Status::MaxIterations => "max-iterations",
            Status::InfeasibleDetected => "infeasible-detected",
            Status::UnboundedDetected => "unbounded-detected",
        }
    }
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Relative residuals of a primal-dual pair.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Residuals {
    pub primal: f64,
    pub dual: f64,
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub status: Status,
    pub primal_blocks: Vec<ComplexMatrix>,
    /// One multiplier per equality, in program order; rows found linearly
    /// dependent during preprocessing carry zero.
    pub dual_multipliers: Vec<f64>,
    /// Σ_k y_k A_kb − C_b, recomputed from the multipliers.
    pub dual_slacks: Vec<ComplexMatrix>,
    pub primal_value: f64,
    pub dual_value: f64,
    pub residuals: Residuals,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityReport {
    pub max_equality_violation: f64,
    pub min_eigenvalues: Vec<f64>,
}

impl FeasibilityReport {
    pub fn min_eigenvalue(&self) -> f64 {
        self.min_eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Equality violations and block spectra of a candidate primal point.
pub fn check_feasibility(p: &ConicProgram, blocks: &[ComplexMatrix]) -> Result<FeasibilityReport> {
    if blocks.len() != p.blocks().len() {
        return Err(Error::Dimension(format!(
            "{} candidate blocks for a program with {}",
            blocks.len(),
            p.blocks().len()
        )));
    }
    for (blk, x) in p.blocks().iter().zip(blocks) {
        if !x.is_square() || x.rows() != blk.side {
            return Err(Error::Dimension(format!("candidate for block `{}` has the wrong side", blk.name)));
        }
    }
    let max_equality_violation = p
        .equalities()
        .iter()
        .map(|eq| {
            let lhs: f64 = eq.terms.iter().map(|(b, a)| a.inner(&blocks[*b])).sum();
            (lhs - eq.rhs).abs()
        })
        .fold(0.0, f64::max);
    let min_eigenvalues = blocks
        .iter()
        .map(|x| min_eigenvalue_matrix(&x.hermitian_part()))
        .collect::<Result<Vec<_>>>()?;
    Ok(FeasibilityReport {
        max_equality_violation,
        min_eigenvalues,
    })
}
