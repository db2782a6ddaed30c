//! Minimization of `‖h + d‖` over block-diagonal Hermitian `d`.
//!
//! After moving to an eigenbasis of `b` and multiplying by `−i`, the quotient
//! norm of a tangent vector is `min_d ‖h + d‖` where `h` is Hermitian and `d`
//! ranges over Hermitian matrices supported on the diagonal blocks. Two
//! solvers are provided: a log-barrier interior point method on the epigraph
//! `−t ≤ h + d ≤ t`, and bisection on `t` with alternating projections.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::linalg::{hermitian_eigen, CMat, C64, I};
use crate::norms::operator_norm;
use crate::sampling::gaussian_matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuotientSolver {
    InteriorPoint,
    AlternatingProjections,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Block {
    pub offset: usize,
    pub size: usize,
}

/// Hermitian basis element of a diagonal block, unit Frobenius norm.
#[derive(Debug, Clone, Copy)]
enum Basis {
    Diag(usize),
    Sym(usize, usize),
    Asym(usize, usize),
}

fn basis(blocks: &[Block]) -> Vec<Basis> {
    let mut out = Vec::new();
    for b in blocks {
        for j in b.offset..b.offset + b.size {
            out.push(Basis::Diag(j));
            for l in j + 1..b.offset + b.size {
                out.push(Basis::Sym(j, l));
                out.push(Basis::Asym(j, l));
            }
        }
    }
    out
}

const R2: f64 = std::f64::consts::FRAC_1_SQRT_2;

fn assemble(h: &CMat, basis: &[Basis], theta: &[f64]) -> CMat {
    let mut m = h.clone();
    for (e, &t) in basis.iter().zip(theta) {
        match *e {
            Basis::Diag(j) => m[(j, j)] += t,
            Basis::Sym(j, l) => {
                m[(j, l)] += t * R2;
                m[(l, j)] += t * R2;
            }
            Basis::Asym(j, l) => {
                m[(j, l)] += I * (t * R2);
                m[(l, j)] -= I * (t * R2);
            }
        }
    }
    m
}

/// `W* E W` for one basis element.
fn rotate(e: Basis, w: &CMat) -> CMat {
    let n = w.nrows();
    match e {
        Basis::Diag(j) => CMat::from_fn(n, n, |a, b| w[(j, a)].conj() * w[(j, b)]),
        Basis::Sym(j, l) => {
            CMat::from_fn(n, n, |a, b| (w[(j, a)].conj() * w[(l, b)] + w[(l, a)].conj() * w[(j, b)]) * R2)
        }
        Basis::Asym(j, l) => {
            CMat::from_fn(n, n, |a, b| I * (w[(j, a)].conj() * w[(l, b)] - w[(l, a)].conj() * w[(j, b)]) * R2)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Minimizer {
    /// `h + d` at the returned point.
    pub matrix: CMat,
    pub norm: f64,
    pub iterations: usize,
    /// Certified upper bound on `norm − optimum` (interior point only).
    pub gap: Option<f64>,
}

fn spectral_norm_herm(m: &CMat) -> f64 {
    let (l, _) = hermitian_eigen(m);
    l.iter().map(|x| x.abs()).fold(0.0, f64::max)
}

pub(crate) fn minimize(h: &CMat, blocks: &[Block], solver: QuotientSolver) -> Minimizer {
    let scale = spectral_norm_herm(h);
    if scale == 0.0 || blocks.is_empty() {
        return Minimizer { matrix: h.clone(), norm: scale, iterations: 0, gap: Some(0.0) };
    }
    let hs = h.map(|z| z / scale);
    let mut out = match solver {
        QuotientSolver::InteriorPoint => interior_point(&hs, blocks),
        QuotientSolver::AlternatingProjections => bisection(&hs, blocks),
    };
    out.matrix = out.matrix.map(|z| z * scale);
    out.norm *= scale;
    out.gap = out.gap.map(|g| g * scale);
    out
}

struct Barrier {
    lambda: Vec<f64>,
    w: CMat,
}

impl Barrier {
    fn at(m: &CMat) -> Self {
        let (lambda, w) = hermitian_eigen(m);
        Barrier { lambda, w }
    }

    fn feasible(&self, t: f64) -> bool {
        self.lambda.iter().all(|&l| t - l > 0.0 && t + l > 0.0)
    }

    fn value(&self, t: f64, tau: f64) -> f64 {
        tau * t - self.lambda.iter().map(|&l| (t - l).ln() + (t + l).ln()).sum::<f64>()
    }
}

const IPM_TOL: f64 = 1e-12;

fn interior_point(h: &CMat, blocks: &[Block]) -> Minimizer {
    let n = h.nrows();
    let basis = basis(blocks);
    let m = basis.len();
    let mut theta = vec![0.0; m];
    let mut t = 1.5;
    let mut tau = 1.0;
    let mut iterations = 0;
    loop {
        for _ in 0..60 {
            iterations += 1;
            let bar = Barrier::at(&assemble(h, &basis, &theta));
            let s1: Vec<f64> = bar.lambda.iter().map(|&l| 1.0 / (t - l)).collect();
            let s2: Vec<f64> = bar.lambda.iter().map(|&l| 1.0 / (t + l)).collect();
            let rotated: Vec<CMat> = basis.iter().map(|&e| rotate(e, &bar.w)).collect();

            let mut grad = DVector::<f64>::zeros(m + 1);
            let mut hess = DMatrix::<f64>::zeros(m + 1, m + 1);
            grad[0] = tau - s1.iter().sum::<f64>() - s2.iter().sum::<f64>();
            hess[(0, 0)] = s1.iter().map(|s| s * s).sum::<f64>() + s2.iter().map(|s| s * s).sum::<f64>();
            for (k, e) in rotated.iter().enumerate() {
                let mut g = 0.0;
                let mut ht = 0.0;
                for a in 0..n {
                    let d = e[(a, a)].re;
                    g += (s1[a] - s2[a]) * d;
                    ht += (s2[a] * s2[a] - s1[a] * s1[a]) * d;
                }
                grad[k + 1] = g;
                hess[(0, k + 1)] = ht;
                hess[(k + 1, 0)] = ht;
            }
            // H_kl = Re Σ_ab c_ab Ẽk_ab conj(Ẽl_ab), assembled as a Gram matrix
            let mut rows = DMatrix::<f64>::zeros(m, 2 * n * n);
            for (k, e) in rotated.iter().enumerate() {
                for a in 0..n {
                    for b in 0..n {
                        let c = (s1[a] * s1[b] + s2[a] * s2[b]).sqrt();
                        let v = e[(a, b)] * c;
                        rows[(k, 2 * (a * n + b))] = v.re;
                        rows[(k, 2 * (a * n + b) + 1)] = v.im;
                    }
                }
            }
            let gram = &rows * rows.transpose();
            hess.view_mut((1, 1), (m, m)).copy_from(&gram);

            let step = solve_newton(&hess, &grad);
            let decrement = -grad.dot(&step);
            if decrement / 2.0 < 1e-10 {
                break;
            }
            let current = bar.value(t, tau);
            let mut alpha = 1.0;
            let mut accepted = false;
            let mut stalled = false;
            while alpha > 1e-16 {
                let tn = t + alpha * step[0];
                let thn: Vec<f64> = theta.iter().enumerate().map(|(k, v)| v + alpha * step[k + 1]).collect();
                let next = Barrier::at(&assemble(h, &basis, &thn));
                if next.feasible(tn) && next.value(tn, tau) <= current - 0.25 * alpha * decrement {
                    // roundoff floor of the Hessian at large τ
                    stalled = (alpha * step[0]).abs() < 1e-15 * t;
                    t = tn;
                    theta = thn;
                    accepted = true;
                    break;
                }
                alpha *= 0.5;
            }
            if !accepted || stalled {
                break;
            }
        }
        // on the central path t − optimum ≤ 2n/τ
        let gap = 2.0 * n as f64 / tau;
        if gap < IPM_TOL * t.max(1e-3) || tau > 1e16 {
            let matrix = assemble(h, &basis, &theta);
            let norm = spectral_norm_herm(&matrix);
            return Minimizer { matrix, norm, iterations, gap: Some(gap) };
        }
        tau *= 10.0;
    }
}

fn solve_newton(hess: &DMatrix<f64>, grad: &DVector<f64>) -> DVector<f64> {
    let rhs = -grad;
    if let Some(ch) = hess.clone().cholesky() {
        return ch.solve(&rhs);
    }
    let ridge = 1e-12 * hess.diagonal().amax().max(1e-300);
    let damped = hess + DMatrix::<f64>::identity(hess.nrows(), hess.ncols()) * ridge;
    damped.lu().solve(&rhs).unwrap_or_else(|| rhs.clone())
}

/// Projection onto the affine set: off-block entries from `h`, diagonal blocks from `m`.
fn project_affine(h: &CMat, blocks: &[Block], m: &CMat) -> CMat {
    let mut out = h.clone();
    for b in blocks {
        for i in b.offset..b.offset + b.size {
            for j in b.offset..b.offset + b.size {
                out[(i, j)] = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
            }
        }
    }
    out
}

fn clip(m: &CMat, level: f64) -> CMat {
    let (lambda, w) = hermitian_eigen(m);
    let mut wd = w.clone();
    for (j, &l) in lambda.iter().enumerate() {
        let c = l.clamp(-level, level);
        for i in 0..wd.nrows() {
            wd[(i, j)] *= c;
        }
    }
    &wd * w.adjoint()
}

/// Alternating projections between `{‖m‖ ≤ level}` and the affine set.
/// Returns the last affine iterate and its norm.
pub(crate) fn alternating_projections(
    h: &CMat,
    blocks: &[Block],
    level: f64,
    start: &CMat,
    max_iter: usize,
) -> (CMat, f64, usize) {
    let mut m = project_affine(h, blocks, start);
    let mut best = (m.clone(), spectral_norm_herm(&m));
    let mut k = 0;
    while k < max_iter {
        k += 1;
        let c = clip(&m, level);
        let next = project_affine(h, blocks, &c);
        let moved = crate::linalg::frobenius(&(&next - &m));
        m = next;
        let norm = spectral_norm_herm(&m);
        if norm < best.1 {
            best = (m.clone(), norm);
        }
        if best.1 <= level * (1.0 + 1e-12) || moved < 1e-14 {
            break;
        }
    }
    (best.0, best.1, k)
}

fn bisection(h: &CMat, blocks: &[Block]) -> Minimizer {
    let n = h.nrows();
    // the norm of an off-block sub-matrix is a lower bound
    let mut lo: f64 = 0.0;
    let mut owner = vec![0usize; n];
    for (k, b) in blocks.iter().enumerate() {
        for i in b.offset..b.offset + b.size {
            owner[i] = k + 1;
        }
    }
    for i in 0..n {
        let row = CMat::from_fn(1, n, |_, j| if owner[j] != 0 && owner[j] == owner[i] { C64::new(0.0, 0.0) } else { h[(i, j)] });
        lo = lo.max(operator_norm(&row));
    }
    let mut best = project_affine(h, blocks, &CMat::zeros(n, n));
    let mut hi = spectral_norm_herm(&best);
    let mut iterations = 0;
    for _ in 0..60 {
        if hi - lo <= 1e-10 * hi.max(1e-300) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let (m, norm, k) = alternating_projections(h, blocks, mid, &best, 4000);
        iterations += k;
        // iterates reach a feasible level only in the limit, from above
        let feasible = norm <= mid + 0.01 * (hi - mid);
        if norm < hi {
            hi = norm;
            best = m;
        }
        if !feasible {
            lo = mid;
        }
    }
    let norm = spectral_norm_herm(&best);
    Minimizer { matrix: best, norm, iterations, gap: None }
}

/// Restarts alternating projections from random points at a level just above
/// `optimum` and returns the largest Frobenius distance from `reference` among
/// the restarts that reached the level.
pub(crate) fn restart_spread<R: Rng + ?Sized>(
    h: &CMat,
    blocks: &[Block],
    reference: &CMat,
    optimum: f64,
    restarts: usize,
    rng: &mut R,
) -> (usize, f64) {
    let n = h.nrows();
    let level = optimum * (1.0 + 1e-9) + 1e-14;
    let mut reached = 0;
    let mut spread: f64 = 0.0;
    for _ in 0..restarts {
        let g = gaussian_matrix(n, n, rng);
        let start = reference + (&g + g.adjoint()) * C64::new(0.5 * optimum.max(1e-3), 0.0);
        let (m, norm, _) = alternating_projections(h, blocks, level, &start, 4000);
        if norm <= level {
            reached += 1;
            spread = spread.max(crate::linalg::frobenius(&(&m - reference)));
        }
    }
    (reached, spread)
}
