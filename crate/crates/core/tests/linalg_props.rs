use proptest::prelude::*;
use qer_core::linalg::{kron, partial_trace, vectorize, ComplexMatrix, Factor, C64};

fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = ComplexMatrix> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), rows * cols).prop_map(move |v| {
        let data = v.into_iter().map(|(re, im)| C64::new(re, im)).collect();
        ComplexMatrix::new(rows, cols, data).unwrap()
    })
}

fn triple() -> impl Strategy<Value = (ComplexMatrix, ComplexMatrix, ComplexMatrix)> {
    (1usize..4, 1usize..4, 1usize..4, 1usize..4)
        .prop_flat_map(|(m, n, p, q)| (matrix(m, n), matrix(n, p), matrix(p, q)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    // |A B C⟩⟩ = (A ⊗ Cᵀ)|B⟩⟩ under row-major vectorization
    #[test]
    fn vectorized_triple_product((a, b, c) in triple()) {
        let lhs = vectorize(&(&(&a * &b) * &c));
        let rhs = kron(&a, &c.transpose()).mul_vec(vectorize(&b).amplitudes());
        for (x, y) in lhs.amplitudes().iter().zip(&rhs) {
            prop_assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn partial_traces_of_products(a in matrix(2, 2), b in matrix(3, 3)) {
        let ab = kron(&a, &b);
        let t1 = partial_trace(&ab, (2, 3), Factor::First).unwrap();
        let t2 = partial_trace(&ab, (2, 3), Factor::Second).unwrap();
        prop_assert!(t1.max_abs_diff(&b.scale(a.trace())) < 1e-12);
        prop_assert!(t2.max_abs_diff(&a.scale(b.trace())) < 1e-12);
    }

    #[test]
    fn partial_trace_preserves_trace(m in matrix(6, 6)) {
        for (dims, f) in [((2, 3), Factor::First), ((2, 3), Factor::Second), ((3, 2), Factor::First)] {
            let t = partial_trace(&m, dims, f).unwrap();
            prop_assert!((t.trace() - m.trace()).norm() < 1e-12);
        }
    }

    // tr_1[(I ⊗ B) M (I ⊗ C)] = B tr_1(M) C
    #[test]
    fn partial_trace_commutes_with_local_ops(m in matrix(6, 6), b in matrix(3, 3), c in matrix(3, 3)) {
        let id = ComplexMatrix::identity(2);
        let lhs = partial_trace(&(&(&kron(&id, &b) * &m) * &kron(&id, &c)), (2, 3), Factor::First).unwrap();
        let rhs = &(&b * &partial_trace(&m, (2, 3), Factor::First).unwrap()) * &c;
        prop_assert!(lhs.max_abs_diff(&rhs) < 1e-12);
    }

    #[test]
    fn hermitian_eigen_reconstructs(m in matrix(4, 4)) {
        let h = m.hermitian_part();
        let e = qer_core::linalg::eig_hermitian(&h).unwrap();
        prop_assert!(e.reconstruct().max_abs_diff(&h) < 1e-12);
        prop_assert!(e.values.windows(2).all(|w| w[0] >= w[1]));
    }
}
