//! Elimination of the linear equalities.
//!
//! The equality rows are brought to reduced row echelon form by sparse
//! Gauss-Jordan elimination. Every feasible coordinate vector is then
//! `x_p + N z` with a particular solution `x_p` and a null-space basis `N`
//! indexed by the free (non-pivot) coordinates.

const NONE: usize = usize::MAX;
/// Entries below this fraction of a row's original norm count as zero.
const DROP_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone)]
pub(crate) struct Inconsistent {
    pub row: usize,
    pub residual: f64,
}

#[derive(Debug, Clone)]
pub(crate) struct Reduced {
    pub n: usize,
    pub m: usize,
    pub pivots: Vec<usize>,
    #[cfg_attr(not(test), allow(dead_code))]
    rows: Vec<Vec<(usize, f64)>>,
    /// Combination of original rows producing each reduced row.
    combos: Vec<Vec<(usize, f64)>>,
    pub free: Vec<usize>,
    /// Column of N for each free coordinate.
    pub null_cols: Vec<Vec<(usize, f64)>>,
    pub dependent: Vec<usize>,
}

fn axpy_sparse(x: &[(usize, f64)], a: f64, y: &[(usize, f64)], fresh: &mut Vec<usize>) -> Vec<(usize, f64)> {
    let mut out = Vec::with_capacity(x.len() + y.len());
    let (mut i, mut j) = (0, 0);
    while i < x.len() || j < y.len() {
        if j == y.len() || (i < x.len() && x[i].0 < y[j].0) {
            out.push(x[i]);
            i += 1;
        } else if i == x.len() || y[j].0 < x[i].0 {
            out.push((y[j].0, a * y[j].1));
            fresh.push(y[j].0);
            j += 1;
        } else {
            out.push((x[i].0, x[i].1 + a * y[j].1));
            i += 1;
            j += 1;
        }
    }
    out
}

fn lookup(row: &[(usize, f64)], col: usize) -> Option<f64> {
    row.binary_search_by_key(&col, |e| e.0).ok().map(|k| row[k].1)
}

fn remove(row: &mut Vec<(usize, f64)>, col: usize) {
    if let Ok(k) = row.binary_search_by_key(&col, |e| e.0) {
        row.remove(k);
    }
}

pub(crate) fn presolve(rows: &[Vec<(usize, f64)>], b: &[f64], n: usize) -> Result<Reduced, Inconsistent> {
    let m = rows.len();
    let mut col_count = vec![0usize; n];
    for row in rows {
        for &(c, _) in row {
            col_count[c] += 1;
        }
    }
    let b_scale = b.iter().fold(1.0f64, |acc, v| acc.max(v.abs()));
    let mut pivot_row = vec![NONE; n];
    let mut col_rows: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut red_rows: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut combos: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut rhs: Vec<f64> = Vec::new();
    let mut pivots: Vec<usize> = Vec::new();
    let mut dependent = Vec::new();
    let mut fresh = Vec::new();

    for k in 0..m {
        let original = &rows[k];
        let norm0 = original.iter().map(|e| e.1 * e.1).sum::<f64>().sqrt();
        let mut row = original.clone();
        let mut comb = vec![(k, 1.0)];
        let mut r = b[k];
        let hits: Vec<(usize, f64)> = original
            .iter()
            .filter(|e| pivot_row[e.0] != NONE)
            .map(|e| (pivot_row[e.0], e.1))
            .collect();
        for (j, coef) in hits {
            row = axpy_sparse(&row, -coef, &red_rows[j], &mut fresh);
            remove(&mut row, pivots[j]);
            comb = axpy_sparse(&comb, -coef, &combos[j], &mut fresh);
            r -= coef * rhs[j];
        }
        fresh.clear();
        row.retain(|e| e.1.abs() > DROP_TOLERANCE * norm0);
        if row.is_empty() {
            if r.abs() > 1e-9 * b_scale {
                return Err(Inconsistent { row: k, residual: r });
            }
            dependent.push(k);
            continue;
        }
        let max_abs = row.iter().fold(0.0f64, |acc, e| acc.max(e.1.abs()));
        let &(pc, pv) = row
            .iter()
            .filter(|e| e.1.abs() >= 0.1 * max_abs)
            .min_by(|a, b| {
                col_count[a.0]
                    .cmp(&col_count[b.0])
                    .then(b.1.abs().total_cmp(&a.1.abs()))
                    .then(a.0.cmp(&b.0))
            })
            .expect("row is non-empty");
        for e in row.iter_mut() {
            e.1 /= pv;
        }
        if let Ok(pos) = row.binary_search_by_key(&pc, |e| e.0) {
            row[pos].1 = 1.0;
        }
        for e in comb.iter_mut() {
            e.1 /= pv;
        }
        r /= pv;

        let mut touched = std::mem::take(&mut col_rows[pc]);
        touched.sort_unstable();
        touched.dedup();
        for &j in &touched {
            let Some(coef) = lookup(&red_rows[j], pc) else {
                continue;
            };
            let updated = axpy_sparse(&red_rows[j], -coef, &row, &mut fresh);
            red_rows[j] = updated;
            remove(&mut red_rows[j], pc);
            let scale = red_rows[j].iter().fold(0.0f64, |acc, e| acc.max(e.1.abs()));
            red_rows[j].retain(|e| e.0 == pivots[j] || e.1.abs() > 1e-15 * scale);
            for &c in &fresh {
                col_rows[c].push(j);
            }
            fresh.clear();
            combos[j] = axpy_sparse(&combos[j], -coef, &comb, &mut fresh);
            fresh.clear();
            rhs[j] -= coef * r;
        }

        let id = red_rows.len();
        for &(c, _) in &row {
            if c != pc {
                col_rows[c].push(id);
            }
        }
        pivot_row[pc] = id;
        pivots.push(pc);
        red_rows.push(row);
        combos.push(comb);
        rhs.push(r);
    }

    let free: Vec<usize> = (0..n).filter(|&c| pivot_row[c] == NONE).collect();
    let mut free_index = vec![NONE; n];
    for (f, &c) in free.iter().enumerate() {
        free_index[c] = f;
    }
    let mut null_cols: Vec<Vec<(usize, f64)>> = free.iter().map(|&c| vec![(c, 1.0)]).collect();
    for (j, row) in red_rows.iter().enumerate() {
        for &(c, v) in row {
            if c != pivots[j] {
                null_cols[free_index[c]].push((pivots[j], -v));
            }
        }
    }
    for col in null_cols.iter_mut() {
        col.sort_by_key(|e| e.0);
    }
    Ok(Reduced {
        n,
        m,
        pivots,
        rows: red_rows,
        combos,
        free,
        null_cols,
        dependent,
    })
}

impl Reduced {
    pub fn n_free(&self) -> usize {
        self.free.len()
    }

    /// A solution of `A x = r` supported on the pivot coordinates.
    pub fn particular(&self, r: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; self.n];
        for (j, comb) in self.combos.iter().enumerate() {
            x[self.pivots[j]] = comb.iter().map(|&(k, c)| c * r[k]).sum();
        }
        x
    }

    /// Multipliers `y` with `Aᵀ y` equal to `v` on the pivot coordinates.
    pub fn multipliers(&self, v: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.m];
        for (j, comb) in self.combos.iter().enumerate() {
            let vp = v[self.pivots[j]];
            for &(k, c) in comb {
                y[k] += c * vp;
            }
        }
        y
    }

    /// `Nᵀ v`.
    pub fn null_transpose(&self, v: &[f64]) -> Vec<f64> {
        self.null_cols
            .iter()
            .map(|col| col.iter().map(|&(p, c)| c * v[p]).sum())
            .collect()
    }

    /// `out += N z`.
    pub fn null_apply(&self, z: &[f64], out: &mut [f64]) {
        for (col, &zf) in self.null_cols.iter().zip(z) {
            for &(p, c) in col {
                out[p] += c * zf;
            }
        }
    }

    #[cfg(test)]
    pub fn reduced_rows(&self) -> &[Vec<(usize, f64)>] {
        &self.rows
    }
}
