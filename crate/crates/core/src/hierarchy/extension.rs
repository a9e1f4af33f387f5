//! Conic programs over PPT symmetric extensions.
//!
//! The main block Ω lives on a product of factors. It is symmetric under
//! exchanging copies inside each copy group, reduces to the identity on the
//! kept factors, and every configured partial transpose is a PSD block tied
//! entrywise to Ω.

use std::time::Instant;

use num_complex::Complex64;

use super::{BoundReport, HierarchyConfig};
use crate::error::{Error, Result};
use crate::linalg::{
    partial_transpose_map, permuted_indices, split_offsets, strides, ComplexMatrix, FactorSubset, HermitianOperator,
};
use crate::sdp::{certified_upper_bound, solve, ConicProgram, Field, Solution, SparseHermitian};

pub(crate) struct Extension<'a> {
    pub factor_dims: Vec<usize>,
    /// Groups of interchangeable factor positions.
    pub copy_groups: Vec<Vec<usize>>,
    /// Factors left after the reduction tr_{rest} Ω = I.
    pub kept: FactorSubset,
    pub rho: &'a HermitianOperator,
    /// Positions of ρ's factors, increasing and in ρ's own order.
    pub rho_factors: FactorSubset,
    pub cuts: Vec<FactorSubset>,
    pub field: Field,
}

const HALF: Complex64 = Complex64::new(0.5, 0.0);
const HALF_I: Complex64 = Complex64::new(0.0, 0.5);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Coefficients v with tr(A X) reading Re X_ij (and Im X_ij off the
/// diagonal) when A holds v at (i, j).
fn entry_values(i: usize, j: usize, field: Field) -> &'static [Complex64] {
    if i == j {
        &[ONE]
    } else if field == Field::Real {
        &[HALF]
    } else {
        &[HALF, HALF_I]
    }
}

/// Offsets of every basis index of `subset`, in the subset's ordered basis.
fn offsets(dims: &[usize], subset: &FactorSubset) -> Vec<usize> {
    let st = strides(dims);
    let sub_dims: Vec<usize> = subset.indices().iter().map(|&k| dims[k]).collect();
    let count: usize = sub_dims.iter().product();
    (0..count)
        .map(|mut j| {
            let mut off = 0;
            for (pos, &k) in subset.indices().iter().enumerate().rev() {
                off += (j % sub_dims[pos]) * st[k];
                j /= sub_dims[pos];
            }
            off
        })
        .collect()
}

pub(crate) fn build_extension(ext: &Extension) -> Result<ConicProgram> {
    let dims = &ext.factor_dims;
    let nf = dims.len();
    let side: usize = dims.iter().product();
    ext.kept.validate(nf)?;
    ext.rho_factors.validate(nf)?;
    for cut in &ext.cuts {
        cut.validate(nf)?;
        if cut.is_empty() {
            return Err(Error::Validation("empty partial-transpose cut".into()));
        }
    }
    let rho_dims: Vec<usize> = ext.rho_factors.indices().iter().map(|&k| dims[k]).collect();
    if ext.rho.dims() != rho_dims.as_slice() {
        return Err(Error::Dimension(format!(
            "operator dims {:?} do not match factors {:?}",
            ext.rho.dims(),
            rho_dims
        )));
    }
    let kept_dim: usize = ext.kept.indices().iter().map(|&k| dims[k]).product();

    let mut p = ConicProgram::new();
    let main = p.add_block("main", side, ext.field);

    // objective: ρ on its factors, identity elsewhere
    let rho_off = offsets(dims, &ext.rho_factors);
    let rest_off = offsets(dims, &ext.rho_factors.complement(nf));
    let rho_m = ext.rho.matrix();
    let mut entries = Vec::new();
    for r in 0..rho_off.len() {
        for c in r..rho_off.len() {
            let v = rho_m[(r, c)];
            if v == Complex64::new(0.0, 0.0) {
                continue;
            }
            let v = if ext.field == Field::Real { Complex64::new(v.re, 0.0) } else { v };
            for &t in &rest_off {
                entries.push((rho_off[r] + t, rho_off[c] + t, v));
            }
        }
    }
    p.set_objective(main, SparseHermitian::new(side, entries)?)?;

    // reduction: tr_{rest} Ω = I on the kept factors
    let kept_off = offsets(dims, &ext.kept);
    let traced_off = offsets(dims, &ext.kept.complement(nf));
    for r in 0..kept_off.len() {
        for c in r..kept_off.len() {
            let parts: &[(Complex64, f64)] = if r == c {
                &[(ONE, 1.0)]
            } else if ext.field == Field::Real {
                &[(HALF, 0.0)]
            } else {
                &[(HALF, 0.0), (HALF_I, 0.0)]
            };
            for &(v, rhs) in parts {
                let op = SparseHermitian::new(
                    side,
                    traced_off.iter().map(|&t| (kept_off[r] + t, kept_off[c] + t, v)),
                )?;
                p.add_equality(vec![(main, op)], rhs)?;
            }
        }
    }

    // symmetry under adjacent transpositions inside each copy group
    for group in &ext.copy_groups {
        for w in group.windows(2) {
            if dims[w[0]] != dims[w[1]] {
                return Err(Error::Dimension("copies must share a dimension".into()));
            }
            let image = transposition_image(dims, w[0], w[1]);
            for i in 0..side {
                for j in i..side {
                    let (pi, pj) = (image[i], image[j]);
                    let (a, b) = if pi <= pj { (pi, pj) } else { (pj, pi) };
                    if (a, b) < (i, j) || (pi, pj) == (i, j) {
                        continue;
                    }
                    for &v in entry_values(i, j, ext.field) {
                        let moved = SparseHermitian::new(side, [(i, j, v), (pi, pj, -v)])?;
                        if !moved.is_empty() {
                            p.add_equality(vec![(main, moved)], 0.0)?;
                        }
                    }
                }
            }
        }
    }

    // tied partial-transpose blocks
    for cut in &ext.cuts {
        let name = format!("pt{:?}", cut.indices());
        let y = p.add_block(name, side, ext.field);
        let (on, off) = split_offsets(dims, cut);
        for r in 0..side {
            for c in r..side {
                let (r2, c2) = partial_transpose_map(&on, &off, r, c);
                for &v in entry_values(r, c, ext.field) {
                    let read = SparseHermitian::new(side, [(r, c, v)])?;
                    let tie = SparseHermitian::new(side, [(r2, c2, -v)])?;
                    p.add_equality(vec![(y, read), (main, tie)], 0.0)?;
                }
            }
        }
    }

    for b in 0..p.blocks().len() {
        p.set_trace_cap(b, kept_dim as f64)?;
    }
    Ok(p)
}

/// Image of every basis index when factors `a` and `b` are exchanged.
fn transposition_image(dims: &[usize], a: usize, b: usize) -> Vec<usize> {
    if dims.iter().all(|&d| d == dims[0]) {
        let mut perm: Vec<usize> = (0..dims.len()).collect();
        perm.swap(a, b);
        return permuted_indices(&perm, dims[0]);
    }
    let st = strides(dims);
    let side: usize = dims.iter().product();
    (0..side)
        .map(|i| {
            let da = (i / st[a]) % dims[a];
            let db = (i / st[b]) % dims[b];
            i - da * st[a] - db * st[b] + db * st[a] + da * st[b]
        })
        .collect()
}

/// The scaled identity c·I on every block, with c fixed by the reduction.
pub(crate) fn identity_point(factor_dims: &[usize], kept: &FactorSubset, blocks: usize) -> Vec<ComplexMatrix> {
    let side: usize = factor_dims.iter().product();
    let traced: usize = kept
        .complement(factor_dims.len())
        .indices()
        .iter()
        .map(|&k| factor_dims[k])
        .product();
    let omega = ComplexMatrix::identity(side).scale(1.0 / traced as f64);
    vec![omega; blocks]
}

pub(crate) fn solve_and_report(program: &ConicProgram, config: &HierarchyConfig) -> Result<(Solution, BoundReport)> {
    let start = Instant::now();
    let sol = solve(program, &config.settings)?;
    let certified_bound = certified_upper_bound(program, &sol)?;
    let report = BoundReport {
        level: config.level,
        primal_value: sol.primal_value,
        dual_value: sol.dual_value,
        certified_bound,
        status: sol.status,
        residuals: sol.residuals,
        iterations: sol.iterations,
        main_side: program.blocks()[0].side,
        wall_time: start.elapsed().as_secs_f64(),
    };
    Ok((sol, report))
}
