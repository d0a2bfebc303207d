mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use sspmprk::linalg::{self, eigenvalues, lu_solve, null_space, DenseMatrix};
use sspmprk::pds::{pds_from_matrix, validate_linear_pds};
use sspmprk::problems::{exact_solution, ProblemId, TestProblem};
use sspmprk::schemes::ETA2_MAX;
use sspmprk::stability::{
    derive_s, imag_axis_denominator, imag_axis_margin, r2, r2_limit, r3, r3_coeffs, r3_taylor,
    third_order_s,
};
use sspmprk::{ComplexValue, Scheme, Sspmprk2Params, Sspmprk3Params};

use common::*;

fn matrix(n: usize) -> impl Strategy<Value = DenseMatrix> {
    prop::collection::vec(-10.0..10.0f64, n * n)
        .prop_map(move |v| DenseMatrix::from_row_major(n, n, v).unwrap())
}

fn valid_pair() -> impl Strategy<Value = (f64, f64)> {
    (0.5..5.0f64, 0.0..=1.0f64).prop_map(|(beta, t)| {
        let alpha_max = ((1.0 - 1.0 / (2.0 * beta)) / beta).min(1.0);
        (t * alpha_max, beta)
    })
}

fn left_half_plane() -> impl Strategy<Value = ComplexValue> {
    (-50.0..0.0f64, -50.0..50.0f64).prop_map(|(re, im)| ComplexValue::new(re, im))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn lu_solve_round_trip(n in 1usize..7, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // diagonally dominant, hence well conditioned
        let mut m = DenseMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = rand::Rng::gen_range(&mut rng, -1.0..1.0);
            }
            m[(i, i)] += n as f64 + 1.0;
        }
        let x: Vec<f64> = (0..n).map(|_| rand::Rng::gen_range(&mut rng, -5.0..5.0)).collect();
        let b = m.mul_vec(&x);
        let solved = lu_solve(&m, &b).unwrap();
        prop_assert!(linalg::dist2(&solved, &x) <= 1e-10 * (1.0 + linalg::norm2(&x)));
    }

    #[test]
    fn eigenvalues_of_transpose_agree(m in matrix(5)) {
        let a = eigenvalues(&m).unwrap();
        let b = eigenvalues(&m.transpose()).unwrap();
        prop_assert!(spectrum_distance(&a, &b) < 1e-6 * (1.0 + m.norm_inf()));
    }

    #[test]
    fn eigenvalue_sum_and_product(m in matrix(4)) {
        let e = eigenvalues(&m).unwrap();
        let trace: f64 = (0..4).map(|i| m[(i, i)]).sum();
        let sum: ComplexValue = e.iter().sum();
        let prod: ComplexValue = e.iter().product();
        let det = m.lu().map(|lu| lu.determinant()).unwrap_or(0.0);
        let scale = 1.0 + m.norm_inf();
        prop_assert!((sum.re - trace).abs() < 1e-9 * scale);
        prop_assert!(sum.im.abs() < 1e-9 * scale);
        prop_assert!((prod.re - det).abs() < 1e-8 * scale.powi(4));
    }

    #[test]
    fn complex_eigenvalues_come_in_pairs(m in matrix(5)) {
        let e = eigenvalues(&m).unwrap();
        let conj: Vec<_> = e.iter().map(|z| z.conj()).collect();
        prop_assert!(spectrum_distance(&e, &conj) < 1e-9 * (1.0 + m.norm_inf()));
    }

    #[test]
    fn random_systems_are_valid_and_have_invariants(n in 2usize..7, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sys = random_system(&mut rng, n);
        prop_assert!(validate_linear_pds(sys.matrix(), 1e-10).unwrap().is_ok());
        prop_assert!(!sys.invariant_basis().is_empty());
        for v in null_space(&sys.matrix().transpose(), 1e-10) {
            let r = sys.matrix().transpose().mul_vec(&v);
            prop_assert!(linalg::norm2(&r) < 1e-8 * (1.0 + sys.matrix().norm_inf()));
        }
    }

    #[test]
    fn sspmprk2_positive_and_conservative(
        n in 2usize..7,
        seed in any::<u64>(),
        (alpha, beta) in valid_pair(),
        log_dt in -3.0..1.5f64,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sys = random_system(&mut rng, n);
        let pds = pds_from_matrix(&sys);
        let y = random_state(&mut rng, n);
        let scheme: Scheme = Sspmprk2Params::new(alpha, beta).unwrap().into();
        let next = scheme.step(&pds, &y, 10f64.powf(log_dt)).unwrap().y_next;
        prop_assert!(next.iter().all(|v| *v > 0.0));
        let before: f64 = y.iter().sum();
        let after: f64 = next.iter().sum();
        prop_assert!((after - before).abs() <= 1e-12 * before);
    }

    #[test]
    fn sspmprk3_positive_and_conservative(
        n in 2usize..7,
        seed in any::<u64>(),
        eta2 in 0.0..=ETA2_MAX,
        log_dt in -3.0..1.5f64,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sys = random_system(&mut rng, n);
        let pds = pds_from_matrix(&sys);
        let y = random_state(&mut rng, n);
        let p = Sspmprk3Params::new(eta2, third_order_s(eta2).unwrap()).unwrap();
        let rec = Scheme::from(p).step(&pds, &y, 10f64.powf(log_dt)).unwrap();
        prop_assert!(rec.y_next.iter().all(|v| *v > 0.0));
        let stages = rec.third_order.unwrap();
        prop_assert!(stages.sigma.iter().all(|v| *v > 0.0));
        prop_assert!(stages.rho.iter().all(|v| *v > 0.0));
        let before: f64 = y.iter().sum();
        let after: f64 = rec.y_next.iter().sum();
        prop_assert!((after - before).abs() <= 1e-12 * before);
    }

    #[test]
    fn margin_sign_matches_modulus((alpha, beta) in valid_pair(), b in -10.0..10.0f64) {
        prop_assume!(b != 0.0);
        let zeroed = |v: f64| if v.abs() <= 1e-12 { 0.0 } else { v.signum() };
        let modulus = r2(ComplexValue::new(0.0, b), alpha, beta).unwrap().norm_sqr() - 1.0;
        let margin = imag_axis_margin(b, alpha, beta) / imag_axis_denominator(b, alpha, beta);
        prop_assert_eq!(zeroed(modulus), zeroed(margin));
    }

    #[test]
    fn r2_conjugate_symmetry((alpha, beta) in valid_pair(), z in left_half_plane()) {
        let a = r2(z.conj(), alpha, beta).unwrap();
        let b = r2(z, alpha, beta).unwrap().conj();
        prop_assert!((a - b).norm() <= 1e-14 * (1.0 + a.norm()));
    }

    #[test]
    fn r3_conjugate_symmetry(eta2 in 0.0..=ETA2_MAX, z in left_half_plane()) {
        let p = Sspmprk3Params::new(eta2, derive_s(eta2).unwrap()).unwrap();
        let a = r3(z.conj(), &p).unwrap();
        let b = r3(z, &p).unwrap().conj();
        prop_assert!((a - b).norm() <= 1e-13 * (1.0 + a.norm()));
    }

    #[test]
    fn r3_nested_equals_coefficient_ratio(eta2 in 0.0..=ETA2_MAX, z in left_half_plane()) {
        let p = Sspmprk3Params::new(eta2, derive_s(eta2).unwrap()).unwrap();
        let nested = r3(z, &p).unwrap();
        let ratio = r3_coeffs(eta2).unwrap().eval(z).unwrap();
        prop_assert!((nested - ratio).norm() <= 1e-9 * (1.0 + nested.norm()));
    }

    #[test]
    fn r2_limit_decreases_in_alpha(beta in 0.5..5.0f64, t in 0.0..0.99f64) {
        let alpha_max = ((1.0 - 1.0 / (2.0 * beta)) / beta).min(1.0);
        let a0 = t * alpha_max;
        let a1 = a0 + 0.01 * alpha_max;
        prop_assume!(beta > 0.5 + 1e-9);
        prop_assert!(r2_limit(a1, beta).unwrap() < r2_limit(a0, beta).unwrap());
    }

    #[test]
    fn exact_solutions_conserve_invariants(k in 0usize..=50) {
        let t = k as f64 * 1e-3;
        for id in ProblemId::ALL {
            let p = TestProblem::builtin(id);
            let start = p.invariant_values(&p.y0);
            let now = p.invariant_values(&exact_solution(&p, t).unwrap());
            for (a, b) in start.iter().zip(&now) {
                prop_assert!((a - b).abs() <= 1e-10 * a.abs());
            }
        }
    }
}

#[test]
fn r2_limit_strictly_decreasing_on_alpha_grid() {
    for beta in [0.75_f64, 1.0, 2.0, 3.0, 4.5] {
        let alpha_max = ((1.0 - 1.0 / (2.0 * beta)) / beta).min(1.0);
        let limits: Vec<f64> = (0..=20)
            .map(|k| r2_limit(alpha_max * k as f64 / 20.0, beta).unwrap())
            .collect();
        assert!(limits.windows(2).all(|w| w[1] < w[0]), "beta {beta}: {limits:?}");
    }
}

#[test]
fn third_order_exponent_matches_exponential_to_z3() {
    for eta2 in [0.0, 0.1, 0.2, 1.0 / 3.0, ETA2_MAX] {
        let t = r3_taylor(&Sspmprk3Params::new(eta2, third_order_s(eta2).unwrap()).unwrap());
        for (k, want) in [1.0, 1.0, 0.5, 1.0 / 6.0].iter().enumerate() {
            assert!((t[k] - want).abs() < 1e-12, "eta2 {eta2}, z^{k}: {}", t[k]);
        }
    }
}

#[test]
fn third_order_exponent_keeps_imaginary_axis_inside() {
    for eta2 in [0.0, 1.0 / 3.0, ETA2_MAX] {
        let p = Sspmprk3Params::new(eta2, third_order_s(eta2).unwrap()).unwrap();
        for k in 0..=500 {
            let y = 10f64.powf(-2.0 + 5.0 * k as f64 / 500.0);
            let m = r3(ComplexValue::new(0.0, y), &p).unwrap().norm();
            assert!(m < 1.0, "eta2 {eta2}, y {y}: {m}");
        }
    }
}
