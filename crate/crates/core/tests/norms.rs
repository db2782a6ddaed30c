mod common;

use finsler_core::linalg::commutator;
use finsler_core::norms::{
    check_hessian_properties, hessian_form, operator_norm, quadratic_form, quadratic_form_sum_of_squares,
    schatten_norm,
};
use finsler_core::sampling::{gaussian_matrix, random_anti_herm, random_anti_herm_with_norm, trial_rng};
use finsler_core::{AntiHermMatrix, CMat, FinslerNorm, HermMatrix, C64};
use proptest::prelude::*;

use common::herm_norm;

fn power_iteration(x: &CMat) -> f64 {
    let g = x.adjoint() * x;
    let n = g.nrows();
    let mut v = CMat::from_fn(n, 1, |i, _| C64::new(1.0 + i as f64 * 0.37, 0.1 * i as f64));
    let mut lambda = 0.0;
    for _ in 0..5000 {
        let w = &g * &v;
        let norm = w.norm();
        if norm == 0.0 {
            return 0.0;
        }
        lambda = norm / v.norm();
        v = w / C64::new(norm, 0.0);
    }
    lambda.sqrt()
}

fn trace_power(x: &CMat, p: u32) -> C64 {
    let mut m = CMat::identity(x.nrows(), x.nrows());
    for _ in 0..p {
        m = &m * x;
    }
    m.trace()
}

fn abs_matrix(x: &CMat) -> CMat {
    let h = HermMatrix::symmetrized(x.adjoint() * x);
    finsler_core::linalg::functional_calculus(&h, |l| l.max(0.0).sqrt()).unwrap().into_inner()
}

#[test]
fn operator_norm_matches_power_iteration() {
    for trial in 0..20 {
        let mut rng = trial_rng(2, trial);
        let x = gaussian_matrix(5, 5, &mut rng);
        let exact = operator_norm(&x);
        assert!((exact - power_iteration(&x)).abs() < 1e-8 * exact);
    }
}

#[test]
fn hessian_is_symmetric_and_positive() {
    for trial in 0..50 {
        let mut rng = trial_rng(2, 100 + trial);
        let a = random_anti_herm(4, &mut rng);
        let b = random_anti_herm(4, &mut rng);
        let c = random_anti_herm(4, &mut rng);
        for p in [4, 6, 8] {
            let bc = hessian_form(&a, &b, &c, p).unwrap();
            let cb = hessian_form(&a, &c, &b, p).unwrap();
            assert!((bc - cb).abs() < 1e-10 * bc.abs().max(1.0));
            assert!(quadratic_form(&a, &b, p).unwrap() >= -1e-10);
        }
    }
}

#[test]
fn quadratic_form_is_second_derivative_of_trace_power() {
    for trial in 0..30 {
        let mut rng = trial_rng(2, 200 + trial);
        let a = random_anti_herm_with_norm(4, 1.0, &mut rng);
        let b = random_anti_herm_with_norm(4, 1.0, &mut rng);
        for p in [4u32, 6] {
            let sign = if (p / 2) % 2 == 0 { 1.0 } else { -1.0 };
            let f = |s: f64| sign * trace_power(&(a.as_mat() + b.as_mat() * C64::new(s, 0.0)), p).re;
            // Richardson-extrapolated central difference
            let fd = (4.0 * common::central_second(f, 0.0, 5e-4) - common::central_second(f, 0.0, 1e-3)) / 3.0;
            let q = quadratic_form(&a, &b, p).unwrap();
            assert!((q - fd).abs() < 1e-6 * q.abs().max(1.0), "p = {p}: {q} vs {fd}");
        }
    }
}

#[test]
fn property_one_with_commutator_direction() {
    for trial in 0..50 {
        let mut rng = trial_rng(2, 300 + trial);
        let a = random_anti_herm_with_norm(4, 1.0, &mut rng);
        let r = random_anti_herm(4, &mut rng);
        let b = AntiHermMatrix::skewed(commutator(a.as_mat(), r.as_mat()));
        let rep = check_hessian_properties(&a, &b, 4).unwrap();
        assert!(rep.property1_lhs <= rep.property1_rhs + 1e-9);
        assert!(rep.holds());
    }
}

#[test]
fn sum_of_squares_with_wider_range_fails() {
    // the identity needs l + m = p/2 − 2; the range l + m = p − 2 overcounts
    let mut rng = trial_rng(2, 400);
    let a = random_anti_herm(3, &mut rng);
    let b = random_anti_herm(3, &mut rng);
    let p = 6u32;
    let q = quadratic_form(&a, &b, p).unwrap();
    assert!((q - quadratic_form_sum_of_squares(&a, &b, p).unwrap()).abs() < 1e-9 * q.max(1.0));
    let anti = a.as_mat() * b.as_mat() + b.as_mat() * a.as_mat();
    let pw = |k: usize| (0..k).fold(CMat::identity(3, 3), |m, _| m * a.as_mat());
    let first = (b.as_mat() * pw(2)).norm_squared();
    let wide: f64 = (0..=4usize).map(|l| (pw(l) * &anti * pw(4 - l)).norm_squared()).sum();
    assert!((p as f64 * first + 3.0 * wide - q).abs() > 1e-3);
}

#[test]
fn limit_in_p_both_traces() {
    for trial in 0..50 {
        let mut rng = trial_rng(2, 500 + trial);
        let dim = 2 + (trial as usize % 10);
        let x = gaussian_matrix(dim, dim, &mut rng);
        let op = operator_norm(&x);
        let bound = 10.0 * (dim as f64).ln() / 64.0;
        let mut prev_std = f64::INFINITY;
        let mut prev_norm = 0.0;
        for p in [4u32, 8, 16, 32, 64] {
            let s = schatten_norm(&x, FinslerNorm::schatten(p).unwrap()).unwrap();
            let t = schatten_norm(&x, FinslerNorm::normalized(p).unwrap()).unwrap();
            // power sums decrease in p, power means increase
            assert!(s <= prev_std * (1.0 + 1e-14));
            assert!(t >= prev_norm * (1.0 - 1e-14));
            assert!(s >= op * (1.0 - 1e-14) && t <= op * (1.0 + 1e-14));
            prev_std = s;
            prev_norm = t;
        }
        assert!(prev_std / op - 1.0 < bound);
        assert!(1.0 - prev_norm / op < bound);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn hessian_is_bilinear(seed in any::<u64>(), s in -3.0f64..3.0, p in prop::sample::select(vec![4u32, 6, 8])) {
        let mut rng = trial_rng(seed, 0);
        let a = random_anti_herm(4, &mut rng);
        let b = random_anti_herm(4, &mut rng);
        let c = random_anti_herm(4, &mut rng);
        let d = random_anti_herm(4, &mut rng);
        let lhs = hessian_form(&a, &b.add(&d.scale(s)), &c, p).unwrap();
        let rhs = hessian_form(&a, &b, &c, p).unwrap() + s * hessian_form(&a, &d, &c, p).unwrap();
        prop_assert!((lhs - rhs).abs() < 1e-10 * lhs.abs().max(rhs.abs()).max(1.0));
    }

    #[test]
    fn sum_of_squares_identity(seed in any::<u64>(), dim in 2usize..=6, p in prop::sample::select(vec![4u32, 6, 8, 10])) {
        let mut rng = trial_rng(seed, 0);
        let a = random_anti_herm_with_norm(dim, 1.2, &mut rng);
        let b = random_anti_herm(dim, &mut rng);
        let q = quadratic_form(&a, &b, p).unwrap();
        let sos = quadratic_form_sum_of_squares(&a, &b, p).unwrap();
        prop_assert!((q - sos).abs() <= 1e-9 * q.abs().max(1.0));
    }

    #[test]
    fn property_one(seed in any::<u64>(), dim in 2usize..=6, p in prop::sample::select(vec![4u32, 6])) {
        let mut rng = trial_rng(seed, 0);
        let a = random_anti_herm(dim, &mut rng);
        let b = random_anti_herm(dim, &mut rng);
        let r = check_hessian_properties(&a, &b, p).unwrap();
        prop_assert!(r.property1_lhs <= r.property1_rhs + 1e-9 * r.property1_rhs.max(1.0));
    }

    #[test]
    fn holder_type_inequalities(seed in any::<u64>(), dim in 2usize..=6, p in prop::sample::select(vec![2u32, 4, 6])) {
        let mut rng = trial_rng(seed, 0);
        let x = gaussian_matrix(dim, dim, &mut rng);
        let y = gaussian_matrix(dim, dim, &mut rng);
        let norm = FinslerNorm::schatten(p).unwrap();
        let xy = norm.eval(&(&x * &y));
        prop_assert!(xy <= operator_norm(&x) * norm.eval(&y) + 1e-10);
        let abs_xy = norm.eval(&(abs_matrix(&x) * &y));
        prop_assert!((abs_xy - xy).abs() <= 1e-10 * xy.max(1.0));
    }

    #[test]
    fn schatten_from_eigenvalues(seed in any::<u64>(), dim in 2usize..=8, p in prop::sample::select(vec![2u32, 4, 6, 8])) {
        let mut rng = trial_rng(seed, 0);
        let x = random_anti_herm(dim, &mut rng);
        let h = x.as_mat().map(|z| z * C64::new(0.0, -1.0));
        let eig = h.clone().symmetric_eigenvalues();
        let oracle = eig.iter().map(|l| l.abs().powi(p as i32)).sum::<f64>().powf(1.0 / p as f64);
        prop_assert!((FinslerNorm::schatten(p).unwrap().eval(x.as_mat()) - oracle).abs() < 1e-12 * oracle.max(1.0));
        prop_assert!((operator_norm(x.as_mat()) - herm_norm(&h)).abs() < 1e-12 * oracle.max(1.0));
    }
}
