use fidelity_core::hierarchy::bell_dual_certificate;
use fidelity_core::linalg::random::{random_hermitian, random_ket};
use fidelity_core::linalg::{hermitian_eig_matrix, permutation_operator, ComplexMatrix, FactorSubset, HermitianOperator};
use fidelity_core::problems::werner_operator;
use fidelity_core::sdp::repaired_bound;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn partial_trace_of_product(seed in any::<u64>(), da in 1usize..4, db in 1usize..4) {
        let mut r = rng(seed);
        let a = HermitianOperator::from_matrix(random_hermitian(&mut r, da)).unwrap();
        let b = HermitianOperator::from_matrix(random_hermitian(&mut r, db)).unwrap();
        let t = a.kron(&b).partial_trace(&FactorSubset::single(1)).unwrap();
        let scale = 1.0 + a.matrix().max_abs() * b.trace().abs();
        prop_assert!((t.matrix() - &a.matrix().scale(b.trace())).max_abs() <= 1e-12 * scale);
    }

    #[test]
    fn partial_transpose_is_an_involution(seed in any::<u64>(), mask in 1u8..8) {
        let mut r = rng(seed);
        let x = HermitianOperator::new(vec![2, 3, 2], random_hermitian(&mut r, 12)).unwrap();
        let subset = FactorSubset::new((0..3).filter(|k| mask & (1 << k) != 0)).unwrap();
        let pt = x.partial_transpose(&subset).unwrap();
        prop_assert!((pt.trace() - x.trace()).abs() <= 1e-12);
        prop_assert!(pt.matrix().hermitian_deviation() <= 1e-12);
        prop_assert_eq!(pt.partial_transpose(&subset).unwrap(), x);
    }

    #[test]
    fn eigen_decomposition_residuals(seed in any::<u64>(), n in 1usize..8) {
        let mut r = rng(seed);
        let h = random_hermitian(&mut r, n);
        let eig = hermitian_eig_matrix(&h).unwrap();
        prop_assert!(eig.values.windows(2).all(|w| w[0] <= w[1]));
        let lam = ComplexMatrix::from_real_diagonal(&eig.values);
        let rec = (&h - &eig.vectors.matmul(&lam).matmul(&eig.vectors.adjoint())).frobenius_norm();
        prop_assert!(rec <= 1e-10 * h.frobenius_norm().max(1.0));
        let orth = (&eig.vectors.adjoint().matmul(&eig.vectors) - &ComplexMatrix::identity(n)).max_abs();
        prop_assert!(orth <= 1e-10);
        let sum: f64 = eig.values.iter().sum();
        prop_assert!((sum - h.trace().re).abs() <= 1e-10 * h.frobenius_norm().max(1.0));
    }

    #[test]
    fn permutation_inverse_restores_kets(seed in any::<u64>(), perm in Just([0usize, 1, 2]).prop_shuffle()) {
        let mut r = rng(seed);
        let ket = random_ket(&mut r, 8);
        let mut inverse = [0usize; 3];
        for (i, &p) in perm.iter().enumerate() {
            inverse[p] = i;
        }
        let p = permutation_operator(&perm, 2).unwrap();
        let q = permutation_operator(&inverse, 2).unwrap();
        let back = q.matmul(&p).mul_vec(&ket);
        prop_assert!(back.iter().zip(&ket).all(|(a, b)| (a - b).norm() <= 1e-12));
    }

    #[test]
    fn werner_operators_are_strategies(t in -1.0f64..=1.0, d in 2usize..5) {
        let w = werner_operator(t, d).unwrap();
        prop_assert!(w.min_eigenvalue().unwrap() >= -1e-12);
        let reduced = w.partial_trace(&FactorSubset::single(1)).unwrap();
        prop_assert!((reduced.matrix() - &ComplexMatrix::identity(d)).max_abs() <= 1e-12);
    }

    #[test]
    fn repaired_bound_is_monotone(dual in -1.0f64..1.0, l1 in -1e-3f64..1e-3, l2 in -1e-3f64..1e-3, extra in 0.0f64..1e-3, cap in 0.5f64..4.0) {
        let base = repaired_bound(dual, &[(l1, cap), (l2, cap)]);
        let worse = repaired_bound(dual, &[(l1 - extra, cap), (l2, cap)]);
        prop_assert!(worse >= base);
        prop_assert!(base >= dual);
    }

    #[test]
    fn bell_certificate_is_feasible(a in 0.0f64..1.0, b in 0.0f64..1.0, c in 0.0f64..1.0, d in 0.0f64..1.0) {
        let total = a + b + c + d;
        prop_assume!(total > 1e-3);
        let p = [a / total, b / total, c / total, d / total];
        let cert = bell_dual_certificate(&p).unwrap();
        prop_assert!(cert.feasibility_slack >= -1e-10);
        let mut s = p.to_vec();
        s.sort_by(|x, y| y.total_cmp(x));
        prop_assert!((cert.bound - s[0] - s[1]).abs() <= 1e-12);
    }
}
