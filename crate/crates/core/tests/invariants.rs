use num_complex::Complex;
use proptest::prelude::*;
use qaffine_boundary::intertwiner::solve_bulk;
use qaffine_boundary::linalg::{flip_operator, kron, normalize_solution, nullspace, projective_compare};
use qaffine_boundary::reps::{check_relations, vector_rep};
use qaffine_boundary::toda::solve_paper_k;
use qaffine_boundary::{CMatrix, CMatrix32, Params64, C32, C64};

fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = CMatrix> {
    prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0), rows * cols).prop_map(move |v| {
        CMatrix::from_vec(rows, cols, v.into_iter().map(|(re, im)| Complex::new(re, im)).collect()).unwrap()
    })
}

fn nonzero(m: &CMatrix) -> bool {
    m.frobenius_norm() > 1e-3
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kron_mixed_product(a in matrix(2, 3), b in matrix(2, 2), c in matrix(3, 2), d in matrix(2, 3)) {
        let lhs = kron(&a, &b).try_mul(&kron(&c, &d)).unwrap();
        let rhs = kron(&a.try_mul(&c).unwrap(), &b.try_mul(&d).unwrap());
        prop_assert!((&lhs - &rhs).frobenius_norm() < 1e-12);
    }

    #[test]
    fn normalize_is_idempotent(v in matrix(3, 3).prop_filter("nonzero", nonzero)) {
        let once = normalize_solution(&v).unwrap();
        let twice = normalize_solution(&once).unwrap();
        prop_assert!((&once - &twice).frobenius_norm() < 1e-14);
        prop_assert!((once.max_modulus() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn projective_compare_ignores_scale(
        a in matrix(3, 3).prop_filter("nonzero", nonzero),
        log_mod in -6.0f64..6.0,
        phase in 0.0f64..std::f64::consts::TAU,
    ) {
        let lambda = Complex::from_polar(10f64.powf(log_mod), phase);
        let cmp = projective_compare(&a, &a.scale(lambda), 1e-10).unwrap();
        prop_assert!(cmp.equal, "deviation {}", cmp.deviation);
    }

    #[test]
    fn nullspace_basis_is_annihilated(m in matrix(3, 5)) {
        let ns = nullspace(&m, 1e-9).unwrap();
        prop_assert!(ns.dimension >= 2);
        for v in &ns.basis {
            let r = m.try_mul(v).unwrap().frobenius_norm();
            prop_assert!(r <= 1e-9 * ns.sigma_max() * v.frobenius_norm());
        }
    }
}

#[test]
fn flip_squares_to_identity() {
    for (d, e) in [(2, 3), (3, 3), (4, 2)] {
        let p = flip_operator::<f64>(d, e).try_mul(&flip_operator(e, d)).unwrap();
        assert_eq!(p, CMatrix::identity(d * e));
    }
}

#[test]
fn dimension_stable_under_rel_tol_changes() {
    let q = Complex::from_polar(0.8, 0.3);
    let x = Complex::from_polar(1.3, 0.45);
    for n in 1..=3 {
        let a = vector_rep(n, q, x).unwrap();
        let b = vector_rep(n, q, Complex::new(0.6, -0.2)).unwrap();
        for tol in [1e-8, 1e-9, 1e-10] {
            assert_eq!(solve_bulk(&a, &b, tol).unwrap().dimension(), 1, "n={n} tol={tol}");
        }
    }
    for n in 2..=4 {
        let signs = Params64::from_real(&vec![-1.0; n + 1]).unwrap();
        let two = Params64::from_real(&[vec![2.0], vec![1.0; n]].concat()).unwrap();
        for tol in [1e-8, 1e-9, 1e-10] {
            assert_eq!(solve_paper_k(n, q, x, &signs, tol).unwrap().dimension(), 1);
            assert_eq!(solve_paper_k(n, q, x, &two, tol).unwrap().dimension(), 0);
        }
    }
}

#[test]
fn single_precision_smoke() {
    let q: C32 = Complex::from_polar(0.8, 0.3);
    let a = vector_rep(2, q, Complex::new(1.2f32, 0.1)).unwrap();
    let b = vector_rep(2, q, Complex::new(0.5f32, -0.4)).unwrap();
    assert!(check_relations(&a, 1e-5).unwrap().passed);
    let sol = solve_bulk(&a, &b, 1e-4).unwrap();
    assert_eq!(sol.dimension(), 1);
    assert!(sol.residual < 1e-4);

    let sol64 = solve_bulk(
        &vector_rep(2, Complex::<f64>::from_polar(0.8, 0.3), Complex::new(1.2, 0.1)).unwrap(),
        &vector_rep(2, Complex::<f64>::from_polar(0.8, 0.3), Complex::new(0.5, -0.4)).unwrap(),
        1e-9,
    )
    .unwrap();
    let k32: &CMatrix32 = sol.unique().unwrap();
    let widened = CMatrix::from_vec(
        9,
        9,
        k32.data().iter().map(|z| C64::new(z.re as f64, z.im as f64)).collect(),
    )
    .unwrap();
    assert!(
        projective_compare(&widened, sol64.unique().unwrap(), 1e-4)
            .unwrap()
            .equal
    );
}
