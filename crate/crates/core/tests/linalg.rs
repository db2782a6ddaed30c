mod common;

use std::f64::consts::FRAC_PI_2;

use finsler_core::linalg::{
    dexp_inverse, dexp_transport, functional_calculus, mat_exp, polar_unitary_part, principal_log_unitary,
};
use finsler_core::sampling::{gaussian_matrix, random_anti_herm, random_anti_herm_with_norm, random_herm, random_unitary, trial_rng, uniform};
use finsler_core::{AntiHermMatrix, CMat, Error, HermMatrix, UnitaryMatrix, C64};
use proptest::prelude::*;

use common::{max_abs, series_exp, simpson_transport};

#[test]
fn exp_of_zero_and_rotation() {
    assert_eq!(mat_exp(&CMat::zeros(3, 3)).unwrap(), CMat::identity(3, 3));
    let j = CMat::from_row_slice(2, 2, &[C64::new(0.0, 0.0), C64::new(-1.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0)]);
    let r = mat_exp(&(&j * C64::new(FRAC_PI_2, 0.0))).unwrap();
    assert!(max_abs(&(r - &j)) < 1e-15);
}

#[test]
fn exp_matches_series_for_all_matrix_classes() {
    let mut rng = trial_rng(1, 0);
    for n in 1..8 {
        let anti = random_anti_herm(n, &mut rng).into_inner();
        let herm = random_herm(n, &mut rng).into_inner();
        let general = gaussian_matrix(n, n, &mut rng);
        for x in [anti, herm, general] {
            let e = mat_exp(&x).unwrap();
            let s = series_exp(&x);
            assert!(max_abs(&(&e - &s)) < 1e-11 * max_abs(&s).max(1.0));
        }
    }
}

#[test]
fn exp_of_anti_hermitian_is_unitary() {
    let mut rng = trial_rng(1, 1);
    let x = random_anti_herm_with_norm(6, 2.5, &mut rng);
    let u = x.exp();
    assert!(u.unitarity_residual() < 1e-12 * 6.0);
}

#[test]
fn exp_rejects_non_finite() {
    let mut x = CMat::zeros(2, 2);
    x[(0, 1)] = C64::new(f64::NAN, 0.0);
    assert_eq!(mat_exp(&x), Err(Error::NonFinite));
}

#[test]
fn log_examples() {
    assert_eq!(principal_log_unitary(&UnitaryMatrix::identity(3)).unwrap().as_mat(), &CMat::zeros(3, 3));
    let u = UnitaryMatrix::new(CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![C64::from_polar(1.0, 1.2), C64::new(1.0, 0.0)]))).unwrap();
    let w = principal_log_unitary(&u).unwrap();
    assert!(max_abs(&(w.as_mat() - AntiHermMatrix::from_imag_diagonal(&[1.2, 0.0]).as_mat())) < 1e-14);
}

#[test]
fn log_at_minus_one_is_rejected() {
    let u = AntiHermMatrix::from_imag_diagonal(&[std::f64::consts::PI, 0.3]).exp();
    assert!(matches!(principal_log_unitary(&u), Err(Error::EigenvalueAtMinusOne(_))));
}

#[test]
fn transport_trivial_cases() {
    let mut rng = trial_rng(1, 2);
    let m = random_anti_herm(4, &mut rng);
    let zero = AntiHermMatrix::zeros(4);
    assert!(max_abs(&(dexp_transport(&zero, &m).unwrap().as_mat() - m.as_mat())) < 1e-15);
    assert!(max_abs(&(dexp_inverse(&zero, &m).unwrap().as_mat() - m.as_mat())) < 1e-15);
    let w = AntiHermMatrix::from_imag_diagonal(&[0.3, -1.0, 2.0, 0.1]);
    let d = AntiHermMatrix::from_imag_diagonal(&[1.0, 0.5, -0.2, 0.0]);
    assert!(max_abs(&(dexp_transport(&w, &d).unwrap().as_mat() - d.as_mat())) < 1e-14);
    assert!(max_abs(&(dexp_inverse(&w, &d).unwrap().as_mat() - d.as_mat())) < 1e-14);
}

#[test]
fn transport_matches_quadrature_dim5() {
    let mut rng = trial_rng(1, 3);
    let w = random_anti_herm_with_norm(5, 2.0, &mut rng);
    let m = random_anti_herm(5, &mut rng);
    let t = dexp_transport(&w, &m).unwrap();
    assert!(max_abs(&(t.as_mat() - simpson_transport(w.as_mat(), m.as_mat(), 10_000))) < 1e-9);
}

#[test]
fn inverse_transport_is_singular_at_full_turn() {
    let w = AntiHermMatrix::from_imag_diagonal(&[std::f64::consts::PI, -std::f64::consts::PI]);
    let z = AntiHermMatrix::skewed(CMat::from_element(2, 2, C64::new(1.0, 0.0)));
    assert!(matches!(dexp_inverse(&w, &z), Err(Error::SingularTransport(_))));
}

#[test]
fn polar_examples() {
    let mut rng = trial_rng(1, 4);
    let u = random_unitary(4, &mut rng);
    assert!(max_abs(&(polar_unitary_part(u.as_mat()).unwrap().as_mat() - u.as_mat())) < 1e-13);
    let r = CMat::identity(3, 3) * C64::new(2.5, 0.0);
    assert!(max_abs(&(polar_unitary_part(&r).unwrap().as_mat() - CMat::identity(3, 3))) < 1e-15);
    assert!(matches!(polar_unitary_part(&CMat::zeros(2, 2)), Err(Error::Singular(_))));
}

#[test]
fn polar_reconstruction_dim6() {
    let mut rng = trial_rng(1, 5);
    let g = gaussian_matrix(6, 6, &mut rng);
    let omega = polar_unitary_part(&g).unwrap();
    let abs = functional_calculus(&HermMatrix::symmetrized(g.adjoint() * &g), f64::sqrt).unwrap();
    assert!(omega.unitarity_residual() < 1e-12);
    assert!(max_abs(&(omega.as_mat() * abs.as_mat() - &g)) < 1e-10 * max_abs(&g));
    // invariant under right multiplication by |g|
    let again = polar_unitary_part(&(&g * abs.as_mat())).unwrap();
    assert!(max_abs(&(again.as_mat() - omega.as_mat())) < 1e-10);
}

#[test]
fn functional_calculus_examples() {
    let a = HermMatrix::from_real_diagonal(&[0.0, 1.0]);
    let id = functional_calculus(&a, |x| x).unwrap();
    assert!(max_abs(&(id.as_mat() - a.as_mat())) < 1e-15);
    let c = functional_calculus(&a, f64::cos).unwrap();
    assert!(max_abs(&(c.as_mat() - HermMatrix::from_real_diagonal(&[1.0, 1f64.cos()]).as_mat())) < 1e-15);
    assert_eq!(functional_calculus(&a, |x| 1.0 / x), Err(Error::FunctionUndefined(0.0)));

    let mut rng = trial_rng(1, 6);
    let u = random_unitary(5, &mut rng);
    let d: Vec<f64> = (0..5).map(|_| uniform(0.0, FRAC_PI_2, &mut rng)).collect();
    let a = HermMatrix::symmetrized(u.conjugate(HermMatrix::from_real_diagonal(&d).as_mat()));
    let back = functional_calculus(&a, |x| x.cos().acos()).unwrap();
    assert!(max_abs(&(back.as_mat() - a.as_mat())) < 1e-10);
}

#[test]
fn constructors_validate() {
    let mut m = CMat::zeros(2, 2);
    m[(0, 1)] = C64::new(1.0, 0.0);
    assert!(matches!(HermMatrix::new(m.clone()), Err(Error::SymmetryViolation { .. })));
    assert!(matches!(AntiHermMatrix::new(m.clone()), Err(Error::SymmetryViolation { .. })));
    assert!(matches!(UnitaryMatrix::new(m * C64::new(2.0, 0.0)), Err(Error::NotUnitary(_))));
    assert!(matches!(HermMatrix::new(CMat::zeros(2, 3)), Err(Error::NotSquare { .. })));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn exp_log_round_trip(seed in any::<u64>(), dim in 2usize..=10, r in 0.0f64..1.0) {
        let mut rng = trial_rng(seed, 0);
        let x = random_anti_herm_with_norm(dim, r * (std::f64::consts::PI - 0.01), &mut rng);
        let w = principal_log_unitary(&x.exp()).unwrap();
        prop_assert!(max_abs(&(w.as_mat() - x.as_mat())) < 1e-8);
    }

    #[test]
    fn log_exp_round_trip(seed in any::<u64>(), dim in 2usize..=8) {
        let mut rng = trial_rng(seed, 0);
        let u = random_unitary(dim, &mut rng);
        if let Ok(w) = principal_log_unitary(&u) {
            let (theta, _) = w.eig();
            prop_assert!(theta.iter().all(|t| t.abs() < std::f64::consts::PI));
            prop_assert!(max_abs(&(w.exp().as_mat() - u.as_mat())) < 1e-10);
        }
    }

    #[test]
    fn transport_round_trip(seed in any::<u64>(), dim in 2usize..=6, r in 0.0f64..3.0) {
        let mut rng = trial_rng(seed, 0);
        let w = random_anti_herm_with_norm(dim, r, &mut rng);
        let z = random_anti_herm(dim, &mut rng);
        let back = dexp_transport(&w, &dexp_inverse(&w, &z).unwrap()).unwrap();
        prop_assert!(max_abs(&(back.as_mat() - z.as_mat())) < 1e-9 * max_abs(z.as_mat()).max(1.0));
    }

    #[test]
    fn transport_is_linear(seed in any::<u64>(), dim in 2usize..=5, s in -2.0f64..2.0) {
        let mut rng = trial_rng(seed, 0);
        let w = random_anti_herm_with_norm(dim, 2.0, &mut rng);
        let a = random_anti_herm(dim, &mut rng);
        let b = random_anti_herm(dim, &mut rng);
        let lhs = dexp_transport(&w, &a.add(&b.scale(s))).unwrap();
        let rhs = dexp_transport(&w, &a).unwrap().add(&dexp_transport(&w, &b).unwrap().scale(s));
        prop_assert!(max_abs(&(lhs.as_mat() - rhs.as_mat())) < 1e-12 * (1.0 + s.abs()) * 10.0);
    }
}
