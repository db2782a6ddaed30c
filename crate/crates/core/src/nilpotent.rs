//! The unitary orbit of the order-two nilpotent `N = [[0, 1], [0, 0]]`
//! (blocks of size `n`).
//!
//! `δ_N(z) = zN − Nz = [[−z₂₁, z₁₁ − z₂₂], [0, z₂₁]]`, so anti-Hermitian
//! liftings of a tangent vector `[[x₀, x₁], [0, −x₀]]` have `z₂₁ = −x₀` and
//! `z₁₁ − z₂₂ = x₁`. The tangent is anti-symmetric when `x₀` is
//! anti-Hermitian; its liftings are then `[[z₁₁, z₁₂], [z₁₂, z₂₂]]` with all
//! blocks anti-Hermitian, and `[[Δ, z₁₂], [z₁₂, −Δ]]`, `Δ = ½(z₁₁ − z₂₂)`, is
//! a minimal one.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{ensure_same_dim, frobenius, polar_unitary_part, AntiHermMatrix, CMat, UnitaryMatrix, C64};
use crate::norms::{operator_norm, singular_values};
use crate::orbit::{delta, KernelSampler};
use crate::sampling::{random_anti_herm_with_norm, uniform};

#[derive(Debug, Clone, PartialEq)]
pub struct NilpotentContext {
    n: usize,
    big_n: CMat,
}

pub fn build_context(n: usize) -> Result<NilpotentContext> {
    if n == 0 {
        return Err(Error::OutOfRange { index: 0, len: 0 });
    }
    let big_n = CMat::from_fn(2 * n, 2 * n, |i, j| if j == i + n { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) });
    Ok(NilpotentContext { n, big_n })
}

fn blocks(m: &CMat, n: usize) -> [CMat; 4] {
    [
        m.view((0, 0), (n, n)).into_owned(),
        m.view((0, n), (n, n)).into_owned(),
        m.view((n, 0), (n, n)).into_owned(),
        m.view((n, n), (n, n)).into_owned(),
    ]
}

fn from_blocks(b11: &CMat, b12: &CMat, b21: &CMat, b22: &CMat) -> CMat {
    let n = b11.nrows();
    let mut m = CMat::zeros(2 * n, 2 * n);
    m.view_mut((0, 0), (n, n)).copy_from(b11);
    m.view_mut((0, n), (n, n)).copy_from(b12);
    m.view_mut((n, 0), (n, n)).copy_from(b21);
    m.view_mut((n, n), (n, n)).copy_from(b22);
    m
}

fn tol(m: &CMat) -> f64 {
    1e-9 * frobenius(m).max(1.0)
}

fn anti_herm_residual(m: &CMat) -> f64 {
    frobenius(&(m + m.adjoint()))
}

fn herm_residual(m: &CMat) -> f64 {
    frobenius(&(m - m.adjoint()))
}

impl NilpotentContext {
    pub fn half_dim(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &CMat {
        &self.big_n
    }

    fn check(&self, m: &CMat) -> Result<()> {
        ensure_same_dim(2 * self.n, m.nrows())?;
        ensure_same_dim(2 * self.n, m.ncols())
    }

    /// `δ_N(z)`
    pub fn delta(&self, z: &CMat) -> CMat {
        delta(&self.big_n, z)
    }

    /// Anti-Hermitian `y = diag(y₀, y₀)`.
    pub fn kernel_membership(&self, y: &CMat) -> bool {
        if self.check(y).is_err() {
            return false;
        }
        let [a, b, c, d] = blocks(y, self.n);
        let t = tol(y);
        frobenius(&b) <= t && frobenius(&c) <= t && frobenius(&(&a - &d)) <= t && anti_herm_residual(&a) <= t
    }

    /// `w = [[a, b], [0, −a]]` with `b` anti-Hermitian.
    pub fn range_membership(&self, w: &CMat) -> bool {
        if self.check(w).is_err() {
            return false;
        }
        let [a, b, c, d] = blocks(w, self.n);
        let t = tol(w);
        frobenius(&c) <= t && frobenius(&(&a + &d)) <= t && anti_herm_residual(&b) <= t
    }

    /// `w = [[a′, b′], [c′, a′]]` with `b′` Hermitian.
    pub fn supplement_membership(&self, w: &CMat) -> bool {
        if self.check(w).is_err() {
            return false;
        }
        let [a, b, _, d] = blocks(w, self.n);
        let t = tol(w);
        frobenius(&(&a - &d)) <= t && herm_residual(&b) <= t
    }

    /// The unique (real-linear) splitting `w = r + s`, `r` in the range of
    /// `δ_N`, `s` in the supplement.
    pub fn split_range_supplement(&self, w: &CMat) -> Result<(CMat, CMat)> {
        self.check(w)?;
        let [w11, w12, w21, w22] = blocks(w, self.n);
        let half = C64::new(0.5, 0.0);
        let a = (&w11 - &w22) * half;
        let a2 = (&w11 + &w22) * half;
        let b = (&w12 - w12.adjoint()) * half;
        let b2 = (&w12 + w12.adjoint()) * half;
        let zero = CMat::zeros(self.n, self.n);
        let r = from_blocks(&a, &b, &zero, &(-&a));
        let s = from_blocks(&a2, &b2, &w21, &a2);
        Ok((r, s))
    }

    /// `s(b) = bb*NN* + b*N`
    pub fn section_operator(&self, b: &CMat) -> CMat {
        let nn = &self.big_n * self.big_n.adjoint();
        b * b.adjoint() * nn + b.adjoint() * &self.big_n
    }

    /// Checks `b² = 0` and `bb*b = b`.
    pub fn check_orbit_shape(&self, b: &CMat) -> Result<()> {
        self.check(b)?;
        let sq = frobenius(&(b * b));
        let pi = frobenius(&(b * b.adjoint() * b - b));
        if sq > 1e-9 * frobenius(b).max(1.0) {
            return Err(Error::NotOrbitShape(format!("‖b²‖ = {sq}")));
        }
        if pi > 1e-9 * frobenius(b).max(1.0) {
            return Err(Error::NotOrbitShape(format!("‖bb*b − b‖ = {pi}")));
        }
        Ok(())
    }
}

/// `μ(b)`, the unitary part of `s(b)`; `μ(b) N μ(b)* = b`.
pub fn nilpotent_cross_section(ctx: &NilpotentContext, b: &CMat) -> Result<UnitaryMatrix> {
    ctx.check_orbit_shape(b)?;
    let s = ctx.section_operator(b);
    let smin = singular_values(&s).into_iter().fold(f64::INFINITY, f64::min);
    if smin <= 1e-10 {
        return Err(Error::NotInSection(smin));
    }
    polar_unitary_part(&s).map_err(|e| match e {
        Error::Singular(v) => Error::NotInSection(v),
        other => other,
    })
}

/// Tangent vector `[[x₀, x₁], [0, −x₀]]` at `N` with `x₀`, `x₁` anti-Hermitian.
#[derive(Debug, Clone, PartialEq)]
pub struct AntiSymTangent {
    pub x0: AntiHermMatrix,
    pub x1: AntiHermMatrix,
}

impl AntiSymTangent {
    pub fn new(x0: AntiHermMatrix, x1: AntiHermMatrix) -> Result<Self> {
        ensure_same_dim(x0.dim(), x1.dim())?;
        Ok(AntiSymTangent { x0, x1 })
    }

    pub fn matrix(&self) -> CMat {
        let n = self.x0.dim();
        from_blocks(self.x0.as_mat(), self.x1.as_mat(), &CMat::zeros(n, n), &(-self.x0.as_mat()))
    }

    /// Reads the blocks of a tangent vector at `N`, requiring the
    /// anti-symmetric pattern.
    pub fn from_matrix(ctx: &NilpotentContext, x: &CMat) -> Result<Self> {
        ctx.check(x)?;
        if !ctx.range_membership(x) {
            return Err(Error::NotTangent(frobenius(&ctx.split_range_supplement(x)?.1)));
        }
        let [a, b, _, _] = blocks(x, ctx.n);
        Ok(AntiSymTangent { x0: AntiHermMatrix::new(a)?, x1: AntiHermMatrix::skewed(b) })
    }

    /// The minimal lifting `[[x₁/2, −x₀], [−x₀, −x₁/2]]`.
    pub fn minimal_lifting(&self) -> AntiHermMatrix {
        let half = self.x1.scale(0.5);
        let off = self.x0.scale(-1.0);
        AntiHermMatrix::skewed(from_blocks(half.as_mat(), off.as_mat(), off.as_mat(), &(-half.as_mat())))
    }
}

/// `z₀ = [[½(z₁₁ − z₂₂), z₁₂], [z₁₂, ½(z₂₂ − z₁₁)]]` for the lifting
/// `z = [[z₁₁, z₁₂], [z₁₂, z₂₂]]`; `z₁₂` must be anti-Hermitian so that the
/// off-diagonal blocks agree with `−z₁₂*`.
pub fn antisymmetric_minimal_lifting(
    ctx: &NilpotentContext,
    z11: &AntiHermMatrix,
    z12: &CMat,
    z22: &AntiHermMatrix,
) -> Result<AntiHermMatrix> {
    ensure_same_dim(ctx.n, z11.dim())?;
    ensure_same_dim(ctx.n, z22.dim())?;
    ensure_same_dim(ctx.n, z12.nrows())?;
    let residual = anti_herm_residual(z12);
    let tolerance = crate::linalg::symtol(ctx.n) * frobenius(z12).max(1.0);
    if residual > tolerance {
        return Err(Error::SymmetryViolation { residual, tolerance });
    }
    let d = z11.sub(z22).scale(0.5);
    Ok(AntiHermMatrix::skewed(from_blocks(d.as_mat(), z12, z12, &(-d.as_mat()))))
}

/// The full lifting `[[z₁₁, z₁₂], [z₁₂, z₂₂]]`.
pub fn antisymmetric_lifting(z11: &AntiHermMatrix, z12: &AntiHermMatrix, z22: &AntiHermMatrix) -> AntiHermMatrix {
    AntiHermMatrix::skewed(from_blocks(z11.as_mat(), z12.as_mat(), z12.as_mat(), z22.as_mat()))
}

/// Pulls `x` back to `N` through `μ(b)` and tests the anti-symmetric pattern.
pub fn antisymmetry_check(ctx: &NilpotentContext, b: &CMat, x: &CMat) -> Result<bool> {
    let mu = nilpotent_cross_section(ctx, b)?;
    ctx.check(x)?;
    let pulled = mu.adjoint().conjugate(x);
    let [a, _, _, _] = blocks(&pulled, ctx.n);
    Ok(ctx.range_membership(&pulled) && anti_herm_residual(&a) <= tol(&pulled))
}

/// Minimal lifting of an anti-symmetric tangent `x` at `b`: `μ z₀ μ*` where
/// `z₀` is the closed-form lifting of `μ* x μ` at `N`.
pub fn antisymmetric_lifting_at(ctx: &NilpotentContext, b: &CMat, x: &CMat) -> Result<AntiHermMatrix> {
    let mu = nilpotent_cross_section(ctx, b)?;
    let pulled = mu.adjoint().conjugate(x);
    let tangent = AntiSymTangent::from_matrix(ctx, &pulled)?;
    Ok(tangent.minimal_lifting().conjugate_by(&mu))
}

impl KernelSampler for NilpotentContext {
    fn dim(&self) -> usize {
        2 * self.n
    }

    /// `diag(y₀, y₀)`, unit operator norm.
    fn sample_kernel(&self, rng: &mut dyn rand::RngCore) -> AntiHermMatrix {
        let y0 = random_anti_herm_with_norm(self.n, 1.0, rng);
        AntiHermMatrix::skewed(from_blocks(y0.as_mat(), &CMat::zeros(self.n, self.n), &CMat::zeros(self.n, self.n), y0.as_mat()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelNormSlack {
    pub samples: usize,
    /// `min ‖z₀ + y‖ − ‖z₀‖`
    pub min_slack: f64,
}

/// Samples kernel elements `y = diag(y₀, y₀)` with `‖y₀‖` uniform in
/// `[0, 2‖z₀‖]` and records the smallest `‖z₀ + y‖ − ‖z₀‖`.
pub fn kernel_norm_slack<R: rand::Rng>(
    ctx: &NilpotentContext,
    z0: &AntiHermMatrix,
    samples: usize,
    rng: &mut R,
) -> Result<KernelNormSlack> {
    ensure_same_dim(2 * ctx.n, z0.dim())?;
    let norm = operator_norm(z0.as_mat());
    let radius = 2.0 * norm.max(1e-12);
    let mut min_slack = f64::INFINITY;
    for _ in 0..samples {
        let y = ctx.sample_kernel(rng).scale(uniform(0.0, radius, rng));
        min_slack = min_slack.min(operator_norm(&(z0.as_mat() + y.as_mat())) - norm);
    }
    Ok(KernelNormSlack { samples, min_slack })
}

/// Largest `|λ_k + λ_{2n+1−k}|` over the sorted spectrum of `−i·z₀`.
pub fn spectral_asymmetry(z0: &AntiHermMatrix) -> f64 {
    let (theta, _) = z0.eig();
    let m = theta.len();
    (0..m).map(|k| (theta[k] + theta[m - 1 - k]).abs()).fold(0.0, f64::max)
}
