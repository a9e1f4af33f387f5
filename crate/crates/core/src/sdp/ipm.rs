//! Infeasible-start primal-dual interior-point method with Nesterov-Todd
//! scaling and Mehrotra predictor-corrector steps, run in the null space of
//! the equality constraints.

use faer::linalg::solvers::Solve;
use faer::{Mat, Side};
use num_complex::Complex64;

use super::params::{dot, norm, sparse_dot, Layout};
use super::presolve::{presolve, Reduced};
use super::program::{ConicProgram, Field, Residuals, Solution, SolverSettings, Status};
use crate::error::{Error, Result};
use crate::linalg::{cholesky_lower, hermitian_eig_matrix, invert_lower, min_eigenvalue_matrix, ComplexMatrix};

const STEP_FRACTION: f64 = 0.98;
const DIVERGENCE_NORM: f64 = 1e10;

struct Scaling {
    r: ComplexMatrix,
    r_inv: ComplexMatrix,
    lambda: Vec<f64>,
    w_inv: ComplexMatrix,
}

fn nt_scaling(x: &ComplexMatrix, s: &ComplexMatrix) -> Option<Scaling> {
    let lx = cholesky_lower(x)?;
    let ls = cholesky_lower(s)?;
    let k = ls.adjoint().matmul(&lx);
    let m = k.adjoint().matmul(&k).hermitian_part();
    let eig = hermitian_eig_matrix(&m).ok()?;
    if eig.values[0] <= 0.0 || !eig.values.iter().all(|v| v.is_finite()) {
        return None;
    }
    let lambda: Vec<f64> = eig.values.iter().map(|v| v.sqrt()).collect();
    let n = lambda.len();
    let lv = lx.matmul(&eig.vectors);
    let r = ComplexMatrix::from_fn(n, n, |i, j| lv[(i, j)] / lambda[j].sqrt());
    let vh_linv = eig.vectors.adjoint().matmul(&invert_lower(&lx));
    let r_inv = ComplexMatrix::from_fn(n, n, |i, j| vh_linv[(i, j)] * lambda[i].sqrt());
    let w_inv = r_inv.adjoint().matmul(&r_inv).hermitian_part();
    Some(Scaling { r, r_inv, lambda, w_inv })
}

impl Scaling {
    fn apply_w_inv(&self, y: &ComplexMatrix) -> ComplexMatrix {
        self.w_inv.matmul(y).matmul(&self.w_inv).hermitian_part()
    }

    fn scale_primal(&self, dx: &ComplexMatrix) -> ComplexMatrix {
        self.r_inv.matmul(dx).matmul(&self.r_inv.adjoint())
    }

    fn scale_dual(&self, ds: &ComplexMatrix) -> ComplexMatrix {
        self.r.adjoint().matmul(ds).matmul(&self.r)
    }

    /// Largest α with Λ + α·Δ ⪰ 0, or infinity.
    fn max_step(&self, scaled: &ComplexMatrix) -> f64 {
        let n = self.lambda.len();
        let d: Vec<f64> = self.lambda.iter().map(|l| 1.0 / l.sqrt()).collect();
        let m = ComplexMatrix::from_fn(n, n, |i, j| scaled[(i, j)] * (d[i] * d[j])).hermitian_part();
        match min_eigenvalue_matrix(&m) {
            Ok(nu) if nu < 0.0 => -1.0 / nu,
            Ok(_) => f64::INFINITY,
            Err(_) => 0.0,
        }
    }
}

struct Problem<'a> {
    program: &'a ConicProgram,
    layout: Layout,
    rows: Vec<Vec<(usize, f64)>>,
    b: Vec<f64>,
    c: Vec<f64>,
    reduced: Reduced,
    /// Per block: free coordinates touching the block with their local entries.
    touch: Vec<Vec<(usize, Vec<(usize, f64)>)>>,
    nu: f64,
}

impl Problem<'_> {
    fn apply_a(&self, x: &[f64]) -> Vec<f64> {
        self.rows.iter().map(|r| sparse_dot(r, x)).collect()
    }

    fn apply_at(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.layout.total];
        for (r, &yk) in self.rows.iter().zip(y) {
            for &(p, a) in r {
                out[p] += a * yk;
            }
        }
        out
    }

    /// Block-diagonal G_b(p, q) = tr(B_p M B_q M) in coordinates.
    fn block_metric(&self, b: usize, m: &ComplexMatrix) -> Vec<f64> {
        let layout = &self.layout.blocks[b];
        let np = layout.count;
        let real = layout.field == Field::Real;
        let mut g = vec![0.0; np * np];
        for p in 0..np {
            let bp = layout.basis(p);
            for q in p..np {
                let bq = layout.basis(q);
                let mut acc = 0.0;
                for &(a, bb, alpha) in bp {
                    for &(c, d, beta) in bq {
                        if real {
                            acc += alpha.re * beta.re * (m[(bb, c)].re * m[(d, a)].re - m[(bb, c)].im * m[(d, a)].im);
                        } else {
                            acc += (alpha * beta * m[(bb, c)] * m[(d, a)]).re;
                        }
                    }
                }
                g[p * np + q] = acc;
                g[q * np + p] = acc;
            }
        }
        g
    }

    fn schur(&self, scalings: &[Scaling]) -> Mat<f64> {
        let nf = self.reduced.n_free();
        let mut h = vec![0.0; nf * nf];
        for (b, touch) in self.touch.iter().enumerate() {
            if touch.is_empty() {
                continue;
            }
            let np = self.layout.blocks[b].count;
            let g = self.block_metric(b, &scalings[b].w_inv);
            let mut u = vec![0.0; touch.len() * np];
            for (i, (_, col)) in touch.iter().enumerate() {
                let ui = &mut u[i * np..(i + 1) * np];
                for &(p, coef) in col {
                    for (o, gv) in ui.iter_mut().zip(&g[p * np..(p + 1) * np]) {
                        *o += coef * gv;
                    }
                }
            }
            for (i, (fi, _)) in touch.iter().enumerate() {
                let ui = &u[i * np..(i + 1) * np];
                for (fj, col) in touch.iter().skip(i) {
                    let v: f64 = col.iter().map(|&(q, coef)| coef * ui[q]).sum();
                    h[fi * nf + fj] += v;
                    if fi != fj {
                        h[fj * nf + fi] += v;
                    }
                }
            }
        }
        Mat::from_fn(nf, nf, |i, j| h[i * nf + j])
    }
}

enum Factor {
    Empty,
    Llt(faer::linalg::solvers::Llt<f64>),
}

fn factor(h: &Mat<f64>) -> Option<Factor> {
    let n = h.nrows();
    if n == 0 {
        return Some(Factor::Empty);
    }
    if let Ok(llt) = h.llt(Side::Lower) {
        return Some(Factor::Llt(llt));
    }
    let max_diag = (0..n).map(|i| h[(i, i)].abs()).fold(0.0f64, f64::max).max(1e-300);
    for delta in [1e-13, 1e-11, 1e-9, 1e-7] {
        let mut reg = h.clone();
        for i in 0..n {
            reg[(i, i)] += delta * max_diag;
        }
        if let Ok(llt) = reg.llt(Side::Lower) {
            return Some(Factor::Llt(llt));
        }
    }
    None
}

impl Factor {
    fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        match self {
            Factor::Empty => Vec::new(),
            Factor::Llt(llt) => {
                let b = Mat::from_fn(rhs.len(), 1, |i, _| rhs[i]);
                let x = llt.solve(&b);
                (0..rhs.len()).map(|i| x[(i, 0)]).collect()
            }
        }
    }
}

struct Direction {
    dx: Vec<ComplexMatrix>,
    ds: Vec<ComplexMatrix>,
}

struct Measures {
    relp: f64,
    reld: f64,
    gap: f64,
    compl: f64,
    pobj: f64,
    dobj: f64,
    r_p: Vec<f64>,
    g: Vec<f64>,
    norm_x: f64,
    norm_s: f64,
    norm_ax: f64,
}

impl Measures {
    fn merit(&self) -> f64 {
        self.relp.max(self.reld).max(self.gap).max(self.compl)
    }
}

pub(crate) fn solve(program: &ConicProgram, settings: &SolverSettings) -> Result<Solution> {
    program.validate()?;
    settings.validate()?;
    let layout = Layout::new(program);
    let rows = layout.equality_rows(program);
    let b: Vec<f64> = program.equalities().iter().map(|e| e.rhs).collect();
    let c = layout.objective_params(program);

    let reduced = match presolve(&rows, &b, layout.total) {
        Ok(r) => r,
        Err(inc) => {
            if settings.verbosity > 0 {
                eprintln!("equality {} is inconsistent (residual {:.3e})", inc.row, inc.residual);
            }
            return Ok(trivial_solution(program, &layout, Status::InfeasibleDetected, inc.residual.abs()));
        }
    };
    if settings.verbosity > 0 {
        eprintln!(
            "presolve: {} equalities, {} dependent, {} free of {} coordinates",
            reduced.m,
            reduced.dependent.len(),
            reduced.n_free(),
            reduced.n
        );
    }

    let mut touch: Vec<Vec<(usize, Vec<(usize, f64)>)>> = vec![Vec::new(); layout.blocks.len()];
    for (f, col) in reduced.null_cols.iter().enumerate() {
        let mut per_block: Vec<(usize, Vec<(usize, f64)>)> = Vec::new();
        for &(p, coef) in col {
            let blk = layout.block_of(p);
            let local = p - layout.blocks[blk].offset;
            match per_block.iter_mut().find(|e| e.0 == blk) {
                Some(e) => e.1.push((local, coef)),
                None => per_block.push((blk, vec![(local, coef)])),
            }
        }
        for (blk, entries) in per_block {
            touch[blk].push((f, entries));
        }
    }
    let nu: f64 = layout.blocks.iter().map(|b| b.side as f64).sum();
    let prob = Problem {
        program,
        layout,
        rows,
        b,
        c,
        reduced,
        touch,
        nu,
    };
    run(&prob, settings)
}

fn trivial_solution(program: &ConicProgram, layout: &Layout, status: Status, primal_residual: f64) -> Solution {
    let primal_blocks: Vec<ComplexMatrix> = layout
        .blocks
        .iter()
        .map(|b| ComplexMatrix::zeros(b.side, b.side))
        .collect();
    let y = vec![0.0; program.equalities().len()];
    Solution {
        status,
        dual_slacks: program.dual_slacks(&y),
        primal_blocks,
        dual_multipliers: y,
        primal_value: 0.0,
        dual_value: 0.0,
        residuals: Residuals {
            primal: primal_residual,
            dual: 0.0,
            gap: 0.0,
        },
        iterations: 0,
    }
}

fn initial_point(prob: &Problem) -> (Vec<ComplexMatrix>, Vec<ComplexMatrix>) {
    let nb = prob.layout.blocks.len();
    let mut a_norm = vec![0.0f64; nb];
    let mut b_ratio = vec![0.0f64; nb];
    for eq in prob.program.equalities() {
        for (blk, a) in &eq.terms {
            let fa = a.frobenius_norm();
            a_norm[*blk] = a_norm[*blk].max(fa);
            b_ratio[*blk] = b_ratio[*blk].max((1.0 + eq.rhs.abs()) / (1.0 + fa));
        }
    }
    let mut xs = Vec::with_capacity(nb);
    let mut ss = Vec::with_capacity(nb);
    for (blk, layout) in prob.layout.blocks.iter().enumerate() {
        let n = layout.side as f64;
        let xi = 10f64.max(n.sqrt()).max(n * b_ratio[blk]);
        let eta = 10f64
            .max(n.sqrt())
            .max(a_norm[blk])
            .max(prob.program.objective(blk).frobenius_norm());
        xs.push(ComplexMatrix::identity(layout.side).scale(xi));
        ss.push(ComplexMatrix::identity(layout.side).scale(eta));
    }
    (xs, ss)
}

fn measure(prob: &Problem, x: &[ComplexMatrix], s: &[ComplexMatrix]) -> (Measures, Vec<f64>) {
    let xp = prob.layout.to_params(x);
    let sp = prob.layout.to_params(s);
    let ax = prob.apply_a(&xp);
    let r_p: Vec<f64> = prob.b.iter().zip(&ax).map(|(b, a)| b - a).collect();
    let v: Vec<f64> = sp.iter().zip(&prob.c).map(|(s, c)| s + c).collect();
    let g = prob.reduced.null_transpose(&v);
    let y = prob.reduced.multipliers(&v);
    let aty = prob.apply_at(&y);
    let rd: Vec<f64> = aty.iter().zip(&v).map(|(a, v)| a - v).collect();
    let pobj = dot(&prob.c, &xp);
    let dobj = dot(&prob.b, &y);
    let denom = 1.0 + pobj.abs() + dobj.abs();
    let m = Measures {
        relp: norm(&r_p) / (1.0 + norm(&prob.b)),
        reld: norm(&rd) / (1.0 + norm(&prob.c)),
        gap: (pobj - dobj).abs() / denom,
        compl: dot(&xp, &sp).max(0.0) / denom,
        pobj,
        dobj,
        r_p,
        g,
        norm_x: norm(&xp),
        norm_s: norm(&sp),
        norm_ax: norm(&ax),
    };
    (m, y)
}

fn direction(
    prob: &Problem,
    scalings: &[Scaling],
    factor: &Factor,
    delta_p: &[ComplexMatrix],
    rc: &[ComplexMatrix],
    g: &[f64],
) -> Direction {
    let u: Vec<ComplexMatrix> = scalings
        .iter()
        .zip(rc.iter().zip(delta_p))
        .map(|(sc, (r, d))| sc.apply_w_inv(&(r - d)))
        .collect();
    let up = prob.layout.to_params(&u);
    let mut rhs = prob.reduced.null_transpose(&up);
    for (r, gv) in rhs.iter_mut().zip(g) {
        *r += gv;
    }
    let dz = factor.solve(&rhs);
    let mut dxp = vec![0.0; prob.layout.total];
    prob.reduced.null_apply(&dz, &mut dxp);
    let nz = prob.layout.to_matrices(&dxp);
    let dx: Vec<ComplexMatrix> = nz.iter().zip(delta_p).map(|(n, d)| n + d).collect();
    let ds = scalings
        .iter()
        .zip(rc.iter().zip(&dx))
        .map(|(sc, (r, d))| sc.apply_w_inv(&(r - d)))
        .collect();
    Direction { dx, ds }
}

fn step_lengths(scalings: &[Scaling], dir: &Direction) -> (f64, f64, Vec<ComplexMatrix>, Vec<ComplexMatrix>) {
    let mut ap = f64::INFINITY;
    let mut ad = f64::INFINITY;
    let mut sx = Vec::with_capacity(scalings.len());
    let mut ss = Vec::with_capacity(scalings.len());
    for (sc, (dx, ds)) in scalings.iter().zip(dir.dx.iter().zip(&dir.ds)) {
        let tx = sc.scale_primal(dx);
        let ts = sc.scale_dual(ds);
        ap = ap.min(sc.max_step(&tx));
        ad = ad.min(sc.max_step(&ts));
        sx.push(tx);
        ss.push(ts);
    }
    (ap, ad, sx, ss)
}

fn run(prob: &Problem, settings: &SolverSettings) -> Result<Solution> {
    let (mut x, mut s) = initial_point(prob);
    let nb = x.len();
    let mut best: Option<(f64, Vec<ComplexMatrix>, Vec<ComplexMatrix>)> = None;
    let mut status = Status::MaxIterations;
    let mut iterations = 0;
    let mut stalled = 0;

    loop {
        let (m, _) = measure(prob, &x, &s);
        if settings.verbosity > 1 {
            eprintln!(
                "{:4} pobj {:+.10e} dobj {:+.10e} relp {:.2e} reld {:.2e} gap {:.2e} compl {:.2e}",
                iterations, m.pobj, m.dobj, m.relp, m.reld, m.gap, m.compl
            );
        }
        let merit = m.merit();
        if best.as_ref().is_none_or(|bst| merit < bst.0) {
            best = Some((merit, x.clone(), s.clone()));
        }
        if m.relp <= settings.feasibility_tolerance
            && m.reld <= settings.feasibility_tolerance
            && m.gap <= settings.gap_tolerance
            && m.compl <= settings.gap_tolerance
        {
            status = Status::Optimal;
            break;
        }
        if m.norm_x > DIVERGENCE_NORM && m.pobj / m.norm_x > 1e-9 && m.norm_ax / m.norm_x < 1e-6 {
            status = Status::UnboundedDetected;
            break;
        }
        if m.norm_s > DIVERGENCE_NORM && m.dobj / m.norm_s < -1e-9 {
            status = Status::InfeasibleDetected;
            break;
        }
        if iterations >= settings.max_iterations || stalled >= 5 {
            break;
        }
        iterations += 1;

        let Some(scalings) = x.iter().zip(&s).map(|(xb, sb)| nt_scaling(xb, sb)).collect::<Option<Vec<_>>>() else {
            break;
        };
        let h = prob.schur(&scalings);
        let Some(fac) = factor(&h) else {
            break;
        };
        let mu = dot(&prob.layout.to_params(&x), &prob.layout.to_params(&s)) / prob.nu;
        let delta_p = prob.layout.to_matrices(&prob.reduced.particular(&m.r_p));

        // predictor
        let rc_aff: Vec<ComplexMatrix> = x.iter().map(|xb| xb.scale(-1.0)).collect();
        let aff = direction(prob, &scalings, &fac, &delta_p, &rc_aff, &m.g);
        let (ap, ad, tx_aff, ts_aff) = step_lengths(&scalings, &aff);
        let ap = ap.min(1.0);
        let ad = ad.min(1.0);
        let mut mu_aff = 0.0;
        for blk in 0..nb {
            let mut xa = x[blk].clone();
            xa.axpy(ap, &aff.dx[blk]);
            let mut sa = s[blk].clone();
            sa.axpy(ad, &aff.ds[blk]);
            mu_aff += xa.trace_product(&sa).re;
        }
        mu_aff /= prob.nu;
        let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);

        // corrector
        let rc: Vec<ComplexMatrix> = (0..nb)
            .map(|blk| {
                let sc = &scalings[blk];
                let n = sc.lambda.len();
                let prod = tx_aff[blk].matmul(&ts_aff[blk]);
                let q = ComplexMatrix::from_fn(n, n, |i, j| {
                    let sym = (prod[(i, j)] + prod[(j, i)].conj()) * 0.5;
                    let diag = if i == j { sigma * mu } else { 0.0 };
                    (Complex64::new(diag, 0.0) - sym) * (2.0 / (sc.lambda[i] + sc.lambda[j]))
                });
                let mut out = sc.r.matmul(&q).matmul(&sc.r.adjoint()).hermitian_part();
                out -= &x[blk];
                out
            })
            .collect();
        let dir = direction(prob, &scalings, &fac, &delta_p, &rc, &m.g);
        let (ap, ad, _, _) = step_lengths(&scalings, &dir);
        let ap = (STEP_FRACTION * ap).min(1.0);
        let ad = (STEP_FRACTION * ad).min(1.0);
        if ap < 1e-10 && ad < 1e-10 {
            stalled += 1;
        } else {
            stalled = 0;
        }
        for blk in 0..nb {
            x[blk].axpy(ap, &dir.dx[blk]);
            x[blk] = x[blk].hermitian_part();
            s[blk].axpy(ad, &dir.ds[blk]);
            s[blk] = s[blk].hermitian_part();
        }
    }

    if status == Status::MaxIterations {
        if let Some((_, bx, bs)) = best {
            x = bx;
            s = bs;
        }
    }
    let solution = finish(prob, status, x, &s, iterations)?;
    if settings.verbosity > 0 {
        eprintln!(
            "status {} after {} iterations: primal {:.12e} dual {:.12e}",
            solution.status, solution.iterations, solution.primal_value, solution.dual_value
        );
    }
    Ok(solution)
}

fn finish(prob: &Problem, status: Status, x: Vec<ComplexMatrix>, s: &[ComplexMatrix], iterations: usize) -> Result<Solution> {
    let (m, y) = measure(prob, &x, s);
    if !m.pobj.is_finite() || !m.dobj.is_finite() {
        return Err(Error::Solver("iterates became non-finite".into()));
    }
    let dual_slacks = prob.program.dual_slacks(&y);
    Ok(Solution {
        status,
        primal_blocks: x,
        dual_multipliers: y,
        dual_slacks,
        primal_value: m.pobj,
        dual_value: m.dobj,
        residuals: Residuals {
            primal: m.relp,
            dual: m.reld,
            gap: m.gap,
        },
        iterations,
    })
}
