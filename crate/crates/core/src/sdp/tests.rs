use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::linalg::random::random_hermitian;
use crate::linalg::ComplexMatrix;
use crate::Error;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn trace_op(n: usize) -> SparseHermitian {
    SparseHermitian::new(n, (0..n).map(|i| (i, i, c(1.0)))).unwrap()
}

/// maximize tr(H X) subject to tr X = 1, X ⪰ 0.
fn max_eigen_program(h: &ComplexMatrix, field: Field) -> ConicProgram {
    let n = h.rows();
    let mut p = ConicProgram::new();
    let b = p.add_block("x", n, field);
    p.set_objective(b, SparseHermitian::from_dense(h).unwrap()).unwrap();
    p.add_equality(vec![(b, trace_op(n))], 1.0).unwrap();
    p.set_trace_cap(b, 1.0).unwrap();
    p
}

/// Largest eigenvalue by shifted power iteration.
fn power_iteration_max(h: &ComplexMatrix) -> f64 {
    let n = h.rows();
    let shift = h.frobenius_norm();
    let mut v: Vec<Complex64> = (0..n).map(|i| c(1.0 + i as f64 * 0.37)).collect();
    let mut value = 0.0;
    for _ in 0..20000 {
        let hv = h.mul_vec(&v);
        let w: Vec<Complex64> = hv.iter().zip(&v).map(|(a, b)| a + b * shift).collect();
        let norm = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        v = w.iter().map(|z| z / norm).collect();
        let hv = h.mul_vec(&v);
        value = v.iter().zip(&hv).map(|(a, b)| (a.conj() * b).re).sum();
    }
    value
}

#[test]
fn single_scalar_block() {
    let mut p = ConicProgram::new();
    let b = p.add_block("x", 1, Field::Real);
    p.set_objective(b, SparseHermitian::new(1, [(0, 0, c(1.0))]).unwrap()).unwrap();
    p.add_equality(vec![(b, SparseHermitian::new(1, [(0, 0, c(1.0))]).unwrap())], 1.0)
        .unwrap();
    let sol = solve(&p, &SolverSettings::default()).unwrap();
    assert_eq!(sol.status, Status::Optimal);
    assert!((sol.primal_value - 1.0).abs() <= 1e-7);
    assert!((sol.dual_value - 1.0).abs() <= 1e-7);
}

#[test]
fn diagonal_objective_picks_largest_entry() {
    let p = max_eigen_program(&ComplexMatrix::from_real_diagonal(&[1.0, 2.0]), Field::Complex);
    let sol = solve(&p, &SolverSettings::default()).unwrap();
    assert_eq!(sol.status, Status::Optimal);
    assert!((sol.primal_value - 2.0).abs() <= 1e-7);
    let bound = certified_upper_bound(&p, &sol).unwrap();
    assert!(bound >= 2.0 - 1e-12 && bound <= 2.0 + 1e-7);
}

#[test]
fn largest_eigenvalue_matches_power_iteration() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for n in [2, 3, 5] {
        let h = random_hermitian(&mut rng, n);
        let oracle = power_iteration_max(&h);
        let sol = solve(&max_eigen_program(&h, Field::Complex), &SolverSettings::default()).unwrap();
        assert_eq!(sol.status, Status::Optimal);
        assert!((sol.primal_value - oracle).abs() <= 1e-6, "{} vs {oracle}", sol.primal_value);
        assert!(sol.dual_value >= sol.primal_value - 1e-7);
    }
}

#[test]
fn real_embedding_doubles_the_value() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let h = random_hermitian(&mut rng, 3);
    let p = max_eigen_program(&h, Field::Complex);
    let direct = solve(&p, &SolverSettings::default()).unwrap();
    let embedded = solve(&p.real_embedding(), &SolverSettings::default()).unwrap();
    assert_eq!(embedded.status, Status::Optimal);
    assert!((embedded.primal_value / 2.0 - direct.primal_value).abs() <= 1e-6);
}

#[test]
fn certificate_formula_on_hand_example() {
    let mut p = ConicProgram::new();
    let b = p.add_block("x", 1, Field::Real);
    p.set_objective(b, SparseHermitian::new(1, [(0, 0, c(1.0))]).unwrap()).unwrap();
    p.add_equality(vec![(b, SparseHermitian::new(1, [(0, 0, c(1.0))]).unwrap())], 2.0)
        .unwrap();
    assert!(matches!(
        certified_bound_for_multipliers(&p, &[1.0]),
        Err(Error::MissingTraceCap { .. })
    ));
    p.set_trace_cap(b, 2.0).unwrap();
    // S = y − 1 = −1e-9, bound = 2y + 2·1e-9
    let y = 1.0 - 1e-9;
    let bound = certified_bound_for_multipliers(&p, &[y]).unwrap();
    assert!((bound - (2.0 * y + 2e-9)).abs() <= 1e-15);
    assert!((certified_bound_for_multipliers(&p, &[1.5]).unwrap() - 3.0).abs() <= 1e-15);
}

#[test]
fn certificate_bounds_every_feasible_point() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let h = random_hermitian(&mut rng, 4);
    let p = max_eigen_program(&h, Field::Complex);
    let opt = power_iteration_max(&h);
    for y in [-3.0, 0.0, 0.5, opt - 0.1, opt, opt + 0.3] {
        assert!(certified_bound_for_multipliers(&p, &[y]).unwrap() >= opt - 1e-9);
    }
}

#[test]
fn inconsistent_equalities_are_infeasible() {
    let mut p = ConicProgram::new();
    let b = p.add_block("x", 2, Field::Real);
    p.add_equality(vec![(b, trace_op(2))], 1.0).unwrap();
    p.add_equality(vec![(b, trace_op(2))], 2.0).unwrap();
    let sol = solve(&p, &SolverSettings::default()).unwrap();
    assert_eq!(sol.status, Status::InfeasibleDetected);
}

#[test]
fn negative_trace_is_infeasible() {
    let mut p = ConicProgram::new();
    let b = p.add_block("x", 2, Field::Complex);
    p.add_equality(vec![(b, trace_op(2))], -1.0).unwrap();
    let sol = solve(&p, &SolverSettings::default()).unwrap();
    assert_eq!(sol.status, Status::InfeasibleDetected);
}

#[test]
fn unbounded_objective_is_detected() {
    let mut p = ConicProgram::new();
    let b = p.add_block("x", 2, Field::Real);
    p.set_objective(b, SparseHermitian::new(2, [(0, 0, c(1.0))]).unwrap()).unwrap();
    p.add_equality(vec![(b, SparseHermitian::new(2, [(0, 0, c(1.0)), (1, 1, c(-1.0))]).unwrap())], 0.0)
        .unwrap();
    let sol = solve(&p, &SolverSettings::default()).unwrap();
    assert_eq!(sol.status, Status::UnboundedDetected);
}

#[test]
fn repeated_solves_are_bit_identical() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let p = max_eigen_program(&random_hermitian(&mut rng, 4), Field::Complex);
    let a = solve(&p, &SolverSettings::default()).unwrap();
    let b = solve(&p, &SolverSettings::default()).unwrap();
    assert_eq!(a.primal_value.to_bits(), b.primal_value.to_bits());
    assert_eq!(a.dual_multipliers, b.dual_multipliers);
    assert_eq!(a.iterations, b.iterations);
}

#[test]
fn extra_constraint_cannot_raise_the_value() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let h = random_hermitian(&mut rng, 3);
    let p = max_eigen_program(&h, Field::Complex);
    let mut q = p.clone();
    q.add_equality(vec![(0, SparseHermitian::new(3, [(0, 0, c(1.0))]).unwrap())], 0.2)
        .unwrap();
    let vp = solve(&p, &SolverSettings::default()).unwrap();
    let vq = solve(&q, &SolverSettings::default()).unwrap();
    assert_eq!(vq.status, Status::Optimal);
    assert!(vq.primal_value <= vp.primal_value + 1e-7);
}

#[test]
fn duplicated_rows_and_ties_between_blocks() {
    // Two blocks tied entrywise: Y = X, maximize tr(H X), tr X = 1.
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let h = random_hermitian(&mut rng, 3);
    let mut p = max_eigen_program(&h, Field::Complex);
    let y = p.add_block("y", 3, Field::Complex);
    p.set_trace_cap(y, 1.0).unwrap();
    for i in 0..3 {
        for j in i..3 {
            let parts: &[Complex64] = if i == j { &[c(1.0)] } else { &[Complex64::new(0.5, 0.0), Complex64::new(0.0, 0.5)] };
            for &v in parts {
                let a = SparseHermitian::new(3, [(i, j, v)]).unwrap();
                let neg = SparseHermitian::new(3, [(i, j, -v)]).unwrap();
                p.add_equality(vec![(0, a.clone()), (y, neg.clone())], 0.0).unwrap();
                p.add_equality(vec![(y, a), (0, neg)], 0.0).unwrap();
            }
        }
    }
    p.add_equality(vec![(0, trace_op(3))], 1.0).unwrap();
    let sol = solve(&p, &SolverSettings::default()).unwrap();
    assert_eq!(sol.status, Status::Optimal);
    assert!((sol.primal_value - power_iteration_max(&h)).abs() <= 1e-6);
    assert!((&sol.primal_blocks[0] - &sol.primal_blocks[1]).max_abs() <= 1e-7);
    let bound = certified_upper_bound(&p, &sol).unwrap();
    assert!(bound >= sol.primal_value - 1e-9 && bound <= sol.primal_value + 1e-6);
}

#[test]
fn feasibility_report_on_solution() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let p = max_eigen_program(&random_hermitian(&mut rng, 3), Field::Complex);
    let sol = solve(&p, &SolverSettings::default()).unwrap();
    let report = check_feasibility(&p, &sol.primal_blocks).unwrap();
    assert!(report.max_equality_violation <= 1e-7);
    assert!(report.min_eigenvalue() >= -1e-9);
}

#[test]
fn feasible_dual_certifies_its_own_value() {
    let p = max_eigen_program(&ComplexMatrix::from_real_diagonal(&[1.0, 3.0]), Field::Real);
    assert!((certified_bound_for_multipliers(&p, &[3.5]).unwrap() - 3.5).abs() <= 1e-15);
}
