//! Real coordinates of Hermitian blocks.
//!
//! A complex block of side `s` has `s²` coordinates: for each `i ≤ j` in
//! row-major order, `Re X_ii` on the diagonal, or `√2 Re X_ij, √2 Im X_ij`
//! off it. A real block keeps only the `s(s+1)/2` real parts. The
//! coordinates are orthonormal for the trace inner product.

use num_complex::Complex64;

use super::program::{ConicProgram, Field, SparseHermitian};
use crate::linalg::ComplexMatrix;

const SQRT2: f64 = std::f64::consts::SQRT_2;

#[derive(Debug, Clone)]
pub(crate) struct BlockLayout {
    pub side: usize,
    pub field: Field,
    pub offset: usize,
    pub count: usize,
    /// Local coordinate of the real part of entry (i, j), i ≤ j, at `i * side + j`.
    pos: Vec<usize>,
    /// Matrix terms `(a, b, α)` of each coordinate's basis element.
    basis: Vec<Vec<(usize, usize, Complex64)>>,
}

impl BlockLayout {
    fn new(side: usize, field: Field, offset: usize) -> Self {
        let mut pos = vec![usize::MAX; side * side];
        let mut basis = Vec::new();
        let h = 1.0 / SQRT2;
        for i in 0..side {
            for j in i..side {
                pos[i * side + j] = basis.len();
                if i == j {
                    basis.push(vec![(i, i, Complex64::new(1.0, 0.0))]);
                } else {
                    basis.push(vec![(i, j, Complex64::new(h, 0.0)), (j, i, Complex64::new(h, 0.0))]);
                    if field == Field::Complex {
                        // X_ij = i/√2, X_ji = −i/√2
                        basis.push(vec![(i, j, Complex64::new(0.0, h)), (j, i, Complex64::new(0.0, -h))]);
                    }
                }
            }
        }
        Self {
            side,
            field,
            offset,
            count: basis.len(),
            pos,
            basis,
        }
    }

    pub fn basis(&self, p: usize) -> &[(usize, usize, Complex64)] {
        &self.basis[p]
    }

    pub fn write_params(&self, x: &ComplexMatrix, out: &mut [f64]) {
        let n = self.side;
        for i in 0..n {
            for j in i..n {
                let p = self.pos[i * n + j];
                if i == j {
                    out[p] = x[(i, i)].re;
                } else {
                    let z = (x[(i, j)] + x[(j, i)].conj()) * 0.5;
                    out[p] = SQRT2 * z.re;
                    if self.field == Field::Complex {
                        out[p + 1] = SQRT2 * z.im;
                    }
                }
            }
        }
    }

    pub fn read_params(&self, params: &[f64]) -> ComplexMatrix {
        let n = self.side;
        let mut m = ComplexMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let p = self.pos[i * n + j];
                if i == j {
                    m[(i, i)] = Complex64::new(params[p], 0.0);
                } else {
                    let im = if self.field == Field::Complex { params[p + 1] } else { 0.0 };
                    let z = Complex64::new(params[p], im) / SQRT2;
                    m[(i, j)] = z;
                    m[(j, i)] = z.conj();
                }
            }
        }
        m
    }

    /// Coordinates of a coefficient operator, so that tr(A X) = row · params(X).
    pub fn operator_row(&self, a: &SparseHermitian, out: &mut Vec<(usize, f64)>) {
        let n = self.side;
        for &(i, j, v) in a.entries() {
            let p = self.offset + self.pos[i * n + j];
            if i == j {
                out.push((p, v.re));
            } else {
                out.push((p, SQRT2 * v.re));
                if self.field == Field::Complex {
                    out.push((p + 1, SQRT2 * v.im));
                }
            }
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Layout {
    pub blocks: Vec<BlockLayout>,
    pub total: usize,
}

impl Layout {
    pub fn new(p: &ConicProgram) -> Self {
        let mut offset = 0;
        let blocks = p
            .blocks()
            .iter()
            .map(|blk| {
                let b = BlockLayout::new(blk.side, blk.field, offset);
                offset += b.count;
                b
            })
            .collect();
        Self { blocks, total: offset }
    }

    pub fn to_params(&self, x: &[ComplexMatrix]) -> Vec<f64> {
        let mut out = vec![0.0; self.total];
        for (b, xb) in self.blocks.iter().zip(x) {
            b.write_params(xb, &mut out[b.offset..b.offset + b.count]);
        }
        out
    }

    pub fn to_matrices(&self, params: &[f64]) -> Vec<ComplexMatrix> {
        self.blocks
            .iter()
            .map(|b| b.read_params(&params[b.offset..b.offset + b.count]))
            .collect()
    }

    pub fn block_of(&self, p: usize) -> usize {
        self.blocks.partition_point(|b| b.offset + b.count <= p)
    }

    /// Equality rows of the program in coordinates, merged and sorted.
    pub fn equality_rows(&self, p: &ConicProgram) -> Vec<Vec<(usize, f64)>> {
        p.equalities()
            .iter()
            .map(|eq| {
                let mut row = Vec::new();
                for (b, a) in &eq.terms {
                    self.blocks[*b].operator_row(a, &mut row);
                }
                merge_sorted(row)
            })
            .collect()
    }

    pub fn objective_params(&self, p: &ConicProgram) -> Vec<f64> {
        let mut out = vec![0.0; self.total];
        for (b, layout) in self.blocks.iter().enumerate() {
            let mut row = Vec::new();
            layout.operator_row(p.objective(b), &mut row);
            for (k, v) in row {
                out[k] += v;
            }
        }
        out
    }
}

pub(crate) fn merge_sorted(mut row: Vec<(usize, f64)>) -> Vec<(usize, f64)> {
    row.sort_by_key(|e| e.0);
    let mut out: Vec<(usize, f64)> = Vec::with_capacity(row.len());
    for (k, v) in row {
        match out.last_mut() {
            Some(last) if last.0 == k => last.1 += v,
            _ => out.push((k, v)),
        }
    }
    out.retain(|e| e.1 != 0.0);
    out
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Sparse row times dense vector.
pub(crate) fn sparse_dot(row: &[(usize, f64)], v: &[f64]) -> f64 {
    row.iter().map(|&(k, a)| a * v[k]).sum()
}
