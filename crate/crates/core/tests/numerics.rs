use proptest::prelude::*;
use secmimo::numerics::*;

fn real_diag(v: &[f64]) -> ComplexMatrix {
    let mut m = zeros(v.len(), v.len());
    for (i, x) in v.iter().enumerate() {
        m[(i, i)] = c(*x, 0.0);
    }
    m
}

#[test]
fn solve_with_identity_returns_rhs() {
    let mut rng = SimRng::new(1);
    let b = rng.complex_gaussian(3, 2, 1.0);
    let x = hermitian_solve(&identity(3), &b).unwrap();
    assert!(approx_eq(&x, &b));
}

#[test]
fn solve_diagonal() {
    let x = hermitian_solve(&real_diag(&[2.0, 4.0]), &identity(2)).unwrap();
    assert!(approx_eq(&x, &real_diag(&[0.5, 0.25])));
}

#[test]
fn solve_random_residual() {
    let mut rng = SimRng::new(2);
    for _ in 0..20 {
        let a = rng.complex_gaussian(8, 8, 1.0) + identity(8) * c(3.0, 0.0);
        let b = rng.complex_gaussian(8, 8, 1.0);
        let x = hermitian_solve(&a, &b).unwrap();
        assert!((&a * &x - &b).norm() / b.norm() < 1e-10);
    }
}

#[test]
fn solve_rejects_singular_and_bad_shapes() {
    assert!(matches!(
        hermitian_solve(&real_diag(&[1.0, 0.0]), &identity(2)),
        Err(secmimo::Error::SingularMatrix { .. })
    ));
    assert!(matches!(hermitian_solve(&identity(3), &identity(2)), Err(secmimo::Error::ShapeMismatch(_))));
}

#[test]
fn null_space_of_rank_one_diagonal() {
    let p = null_space_projector(&real_diag(&[1.0, 0.0]), 1e-10);
    assert!(approx_eq(&p, &real_diag(&[0.0, 1.0])));
}

#[test]
fn null_space_fallback_picks_lowest_index() {
    let ns = null_space(&identity(2), 1e-10);
    assert!(ns.fallback);
    assert!(approx_eq(&ns.projector, &real_diag(&[1.0, 0.0])));
}

#[test]
fn null_space_of_constructed_kernel() {
    let mut rng = SimRng::new(3);
    for _ in 0..10 {
        // A = B Q^H where Q spans a 6-dim subspace of C^8: kernel has dim 2.
        let q = rng.complex_gaussian(8, 6, 1.0).qr().q();
        let a = rng.complex_gaussian(6, 6, 1.0) * q.adjoint();
        let p = null_space_projector(&a, 1e-8);
        assert!((trace_re(&p) - 2.0).abs() < 1e-8);
        assert!((&a * &p).norm() < 1e-8);
    }
}

#[test]
fn wirtinger_gradient_of_linear_functional() {
    let mut rng = SimRng::new(4);
    let x = rng.complex_gaussian(3, 3, 1.0);
    let g = finite_diff_gradient(|m| trace_re(m), &x, 1e-6);
    assert!(approx_eq_tol(&g, &(identity(3) * c(0.5, 0.0)), 1e-8));
}

#[test]
fn wirtinger_gradient_of_frobenius_norm() {
    let mut rng = SimRng::new(5);
    let x = rng.complex_gaussian(3, 2, 1.0);
    let g = finite_diff_gradient(fro2, &x, 1e-6);
    assert!(approx_eq_tol(&g, &x, 1e-8));
}

#[test]
fn rng_is_reproducible() {
    let a = SimRng::new(9).complex_gaussian(4, 4, 1.0);
    let b = SimRng::new(9).complex_gaussian(4, 4, 1.0);
    assert_eq!(a, b);
}

fn matrix(n: usize, m: usize) -> impl Strategy<Value = ComplexMatrix> {
    prop::collection::vec(-1.0f64..1.0, 2 * n * m)
        .prop_map(move |v| ComplexMatrix::from_fn(n, m, |i, j| c(v[2 * (i * m + j)], v[2 * (i * m + j) + 1])))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn solve_residual_for_diagonally_dominant(a in matrix(6, 6), b in matrix(6, 3)) {
        let a = a + identity(6) * c(7.0, 0.0);
        let x = hermitian_solve(&a, &b).unwrap();
        prop_assert!((&a * &x - &b).norm() <= 1e-10 * (1.0 + b.norm()));
    }

    #[test]
    fn projector_is_idempotent_and_hermitian(a in matrix(4, 6), rank_cut in 0usize..4) {
        // Zero some rows to create a kernel of varying size.
        let mut a = a;
        for i in 0..rank_cut {
            a.row_mut(i).fill(c(0.0, 0.0));
        }
        let p = null_space_projector(&a, 1e-8);
        prop_assert!(is_hermitian(&p, 1e-12));
        prop_assert!((&p * &p - &p).norm() <= 1e-8);
        prop_assert!(trace_re(&p) >= 1.0 - 1e-9);
    }

    #[test]
    fn quadratic_trace_gradient(x in matrix(4, 4), a in matrix(4, 4)) {
        // f(X) = tr(X A X^H) with A Hermitian: df/dX* = X A.
        let a = (&a + a.adjoint()) * c(0.5, 0.0);
        let f = |m: &ComplexMatrix| trace_re(&(m * &a * m.adjoint()));
        let g = finite_diff_gradient(f, &x, 1e-6);
        let analytic = &x * &a;
        prop_assert!((&g - &analytic).norm() <= 1e-5 * (1.0 + analytic.norm()));
    }
}
