//! Random instance generators.
//!
//! Every stochastic routine in the crate takes an explicit RNG; trials derive
//! their stream from `(seed, trial index)` so results do not depend on the
//! order in which trials are run.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::{real_scale, AntiHermMatrix, CMat, HermMatrix, UnitaryMatrix, C64};
use crate::norms::operator_norm;

/// Independent stream for one trial of a seeded run.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

pub fn gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMat {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    CMat::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re * s, im * s)
    })
}

pub fn random_anti_herm<R: Rng + ?Sized>(n: usize, rng: &mut R) -> AntiHermMatrix {
    AntiHermMatrix::skewed(gaussian_matrix(n, n, rng))
}

/// Random anti-Hermitian matrix rescaled to the given operator norm.
pub fn random_anti_herm_with_norm<R: Rng + ?Sized>(n: usize, norm: f64, rng: &mut R) -> AntiHermMatrix {
    let x = random_anti_herm(n, rng);
    let current = operator_norm(x.as_mat());
    if current == 0.0 {
        return x;
    }
    x.scale(norm / current)
}

pub fn random_herm<R: Rng + ?Sized>(n: usize, rng: &mut R) -> HermMatrix {
    HermMatrix::symmetrized(gaussian_matrix(n, n, rng))
}

/// Haar-distributed unitary (QR of a Ginibre matrix with phase correction).
pub fn random_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> UnitaryMatrix {
    let g = gaussian_matrix(n, n, rng);
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    UnitaryMatrix::new_unchecked(q)
}

/// Orthogonal projection of the given rank onto a Haar-random subspace.
pub fn random_projection<R: Rng + ?Sized>(n: usize, rank: usize, rng: &mut R) -> HermMatrix {
    let u = random_unitary(n, rng);
    let frame = u.as_mat().columns(0, rank).into_owned();
    HermMatrix::symmetrized(&frame * frame.adjoint())
}

/// Uniform real in `[lo, hi)`.
pub fn uniform<R: Rng + ?Sized>(lo: f64, hi: f64, rng: &mut R) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}

/// Random matrix with unit operator norm.
pub fn random_unit_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMat {
    let g = gaussian_matrix(rows, cols, rng);
    let n = operator_norm(&g);
    real_scale(&g, 1.0 / n)
}
