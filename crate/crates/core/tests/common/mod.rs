//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use finsler_core::linalg::{AntiHermMatrix, CMat, HermMatrix, UnitaryMatrix, C64};
use finsler_core::norms::operator_norm;
use finsler_core::orbit::SpectralDecomposition;
use finsler_core::sampling::{gaussian_matrix, random_unitary, uniform};
use nalgebra::{DMatrix, DVector};
use rand::Rng;

/// Taylor series with scaling and squaring.
pub fn series_exp(x: &CMat) -> CMat {
    let n = x.nrows();
    let norm = x.iter().map(|z| z.norm()).sum::<f64>();
    let mut squarings = 0;
    let mut scale = 1.0;
    while norm * scale > 0.25 {
        scale *= 0.5;
        squarings += 1;
    }
    let y = x.map(|z| z * scale);
    let mut term = CMat::identity(n, n);
    let mut sum = CMat::identity(n, n);
    for k in 1..30 {
        term = &term * &y / C64::new(k as f64, 0.0);
        sum += &term;
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

/// Composite Simpson rule for `∫₀¹ e^{−tw} m e^{tw} dt` with `panels` panels.
pub fn simpson_transport(w: &CMat, m: &CMat, panels: usize) -> CMat {
    let n = w.nrows();
    let h = 1.0 / panels as f64;
    let half = series_exp(&w.map(|z| z * (h / 2.0)));
    let half_inv = series_exp(&w.map(|z| z * (-h / 2.0)));
    let mut right = CMat::identity(n, n); // e^{tw}
    let mut left = CMat::identity(n, n); // e^{−tw}
    let mut acc = CMat::zeros(n, n);
    let nodes = 2 * panels;
    for k in 0..=nodes {
        let weight = if k == 0 || k == nodes {
            1.0
        } else if k % 2 == 1 {
            4.0
        } else {
            2.0
        };
        acc += (&left * m * &right) * C64::new(weight, 0.0);
        right = &right * &half;
        left = &half_inv * &left;
    }
    acc * C64::new(h / 6.0, 0.0)
}

pub fn central_first(f: impl Fn(f64) -> f64, s: f64, h: f64) -> f64 {
    (f(s + h) - f(s - h)) / (2.0 * h)
}

pub fn central_second(f: impl Fn(f64) -> f64, s: f64, h: f64) -> f64 {
    (f(s + h) - 2.0 * f(s) + f(s - h)) / (h * h)
}

/// `‖log u‖_p^p` from the eigenvalues of the unitary, without any logarithm
/// of a matrix.
pub fn log_power_sum(u: &UnitaryMatrix, p: u32) -> f64 {
    let eig = u.as_mat().clone().eigenvalues().expect("square");
    eig.iter().map(|l| l.arg().abs().powi(p as i32)).sum()
}

/// Real least squares `min ‖Ax − b‖` via SVD; returns the residual norm.
pub fn least_squares_residual(a: &DMatrix<f64>, b: &DVector<f64>) -> f64 {
    let svd = a.clone().svd(true, true);
    let x = svd.solve(b, 1e-12).expect("svd solve");
    (a * x - b).norm()
}

pub fn to_real(m: &CMat) -> DVector<f64> {
    DVector::from_iterator(2 * m.len(), m.iter().flat_map(|z| [z.re, z.im]))
}

/// Least-squares residual of `δ_A(y) = w` over all complex `y`.
pub fn delta_range_residual(a: &CMat, w: &CMat) -> f64 {
    let n = a.nrows();
    let mut cols = Vec::new();
    for i in 0..n {
        for j in 0..n {
            for (re, im) in [(1.0, 0.0), (0.0, 1.0)] {
                let mut e = CMat::zeros(n, n);
                e[(i, j)] = C64::new(re, im);
                cols.push(to_real(&(&e * a - a * &e)));
            }
        }
    }
    let mat = DMatrix::from_columns(&cols);
    least_squares_residual(&mat, &to_real(w))
}

/// Random decomposition with the given multiplicities in a Haar-random basis.
pub fn random_spectrum<R: Rng>(eigenvalues: &[f64], sizes: &[usize], rng: &mut R) -> SpectralDecomposition {
    let base = SpectralDecomposition::diagonal(eigenvalues, sizes).unwrap();
    let n: usize = sizes.iter().sum();
    base.conjugated(&random_unitary(n, rng))
}

/// Largest absolute eigenvalue of a Hermitian matrix.
pub fn herm_norm(m: &CMat) -> f64 {
    m.clone().symmetric_eigenvalues().iter().map(|x| x.abs()).fold(0.0, f64::max)
}

pub fn block(x: &CMat, y: &CMat, z: &CMat) -> CMat {
    let (k, m) = (x.nrows(), z.nrows());
    let mut out = CMat::zeros(k + m, k + m);
    out.view_mut((0, 0), (k, k)).copy_from(x);
    out.view_mut((0, k), (k, m)).copy_from(y);
    out.view_mut((k, 0), (m, k)).copy_from(&y.adjoint());
    out.view_mut((k, k), (m, m)).copy_from(z);
    out
}

/// Random search plus local descent for `min_Z ‖[[X, Y], [Y*, Z]]‖` over
/// Hermitian `Z`; starts from the candidate `z0` and from random points.
pub fn brute_force_completion<R: Rng>(x: &CMat, y: &CMat, z0: &CMat, samples: usize, rng: &mut R) -> f64 {
    let m = z0.nrows();
    let mu = herm_norm(&block(x, y, z0)).max(1e-12);
    let mut best_z = z0.clone();
    let mut best = herm_norm(&block(x, y, z0));
    let herm = |g: CMat| (&g + g.adjoint()) * C64::new(0.5, 0.0);
    for k in 0..samples {
        let cand = if k % 4 == 0 {
            herm(gaussian_matrix(m, m, rng)) * C64::new(mu * uniform(0.0, 2.0, rng), 0.0)
        } else {
            let r = mu * 10f64.powf(uniform(-6.0, 0.0, rng));
            &best_z + herm(gaussian_matrix(m, m, rng)) * C64::new(r, 0.0)
        };
        let v = herm_norm(&block(x, y, &cand));
        if v < best {
            best = v;
            best_z = cand;
        }
    }
    best
}

/// `min ‖z + d‖` over `d = diag(iα, iβ)` on a square grid of half-width `r`.
pub fn grid_quotient_2x2(z: &CMat, r: f64, steps: usize) -> f64 {
    let mut best = f64::INFINITY;
    for a in 0..=steps {
        for b in 0..=steps {
            let alpha = -r + 2.0 * r * a as f64 / steps as f64;
            let beta = -r + 2.0 * r * b as f64 / steps as f64;
            let mut m = z.clone();
            m[(0, 0)] += C64::new(0.0, alpha);
            m[(1, 1)] += C64::new(0.0, beta);
            best = best.min(operator_norm(&m));
        }
    }
    best
}

pub fn herm(m: CMat) -> HermMatrix {
    HermMatrix::symmetrized(m)
}

pub fn anti(m: CMat) -> AntiHermMatrix {
    AntiHermMatrix::skewed(m)
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}
