//! Unitary orbits `{uAu*}` of a self-adjoint matrix with finite spectrum.
//!
//! The tangent space at `b` is the range of `δ_b(y) = yb − by` restricted to
//! anti-Hermitian `y`; its kernel is the block-diagonal part with respect to
//! the spectral projections of `b`. The quotient norm of a tangent vector is
//! the smallest operator norm among its liftings.

mod quotient;

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geodesic::{log_norm, two_segment_length};
use crate::linalg::{
    ensure_same_dim, frobenius, hermitian_eigen, polar_unitary_part, principal_log_unitary, AntiHermMatrix, CMat,
    HermMatrix, UnitaryMatrix, C64, I,
};
use crate::norms::{operator_norm, singular_values, FinslerNorm};
use crate::sampling::{random_anti_herm, random_unit_matrix, uniform};

use quotient::Block;
pub use quotient::QuotientSolver;

/// `yb − by`
pub fn delta(b: &CMat, y: &CMat) -> CMat {
    y * b - b * y
}

/// `A = Σ λ_i p_i` with distinct `λ_i` and orthogonal projections `p_i`
/// summing to the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDecomposition {
    eigenvalues: Vec<f64>,
    projections: Vec<HermMatrix>,
    frames: Vec<CMat>,
}

fn frame_of(p: &HermMatrix) -> CMat {
    let (l, v) = hermitian_eigen(p.as_mat());
    let cols: Vec<usize> = (0..l.len()).filter(|&k| l[k] > 0.5).collect();
    CMat::from_fn(p.dim(), cols.len(), |i, j| v[(i, cols[j])])
}

impl SpectralDecomposition {
    /// Groups eigenvalues closer than `tol·max(1, ‖A‖)`.
    pub fn from_hermitian(a: &HermMatrix, tol: f64) -> Result<Self> {
        let (lambda, v) = a.eigh();
        let n = a.dim();
        if n == 0 {
            return Err(Error::InvalidDecomposition("empty matrix".into()));
        }
        let scale = lambda.iter().map(|l| l.abs()).fold(1.0, f64::max);
        let mut groups: Vec<Vec<usize>> = vec![vec![0]];
        for k in 1..n {
            if lambda[k] - lambda[k - 1] <= tol * scale {
                groups.last_mut().unwrap().push(k);
            } else {
                groups.push(vec![k]);
            }
        }
        let mut eigenvalues = Vec::new();
        let mut frames = Vec::new();
        let mut projections = Vec::new();
        for g in groups {
            eigenvalues.push(g.iter().map(|&k| lambda[k]).sum::<f64>() / g.len() as f64);
            let f = CMat::from_fn(n, g.len(), |i, j| v[(i, g[j])]);
            projections.push(HermMatrix::symmetrized(&f * f.adjoint()));
            frames.push(f);
        }
        Ok(SpectralDecomposition { eigenvalues, projections, frames })
    }

    /// Validates `p_i p_j = 0`, `p_i² = p_i`, `Σ p_i = 1` and distinct eigenvalues.
    pub fn from_parts(eigenvalues: Vec<f64>, projections: Vec<HermMatrix>) -> Result<Self> {
        if eigenvalues.is_empty() || eigenvalues.len() != projections.len() {
            return Err(Error::InvalidDecomposition("need one projection per eigenvalue".into()));
        }
        let n = projections[0].dim();
        let tol = 1e-10 * n as f64;
        let mut sum = CMat::zeros(n, n);
        for (i, p) in projections.iter().enumerate() {
            ensure_same_dim(n, p.dim())?;
            if frobenius(&(p.as_mat() * p.as_mat() - p.as_mat())) > tol {
                return Err(Error::InvalidDecomposition(format!("p_{i} is not idempotent")));
            }
            for (j, q) in projections.iter().enumerate().skip(i + 1) {
                if frobenius(&(p.as_mat() * q.as_mat())) > tol {
                    return Err(Error::InvalidDecomposition(format!("p_{i} p_{j} ≠ 0")));
                }
                if eigenvalues[i] == eigenvalues[j] {
                    return Err(Error::InvalidDecomposition(format!("λ_{i} = λ_{j}")));
                }
            }
            sum += p.as_mat();
        }
        if frobenius(&(sum - CMat::identity(n, n))) > tol {
            return Err(Error::InvalidDecomposition("projections do not sum to 1".into()));
        }
        let frames = projections.iter().map(frame_of).collect::<Vec<_>>();
        if frames.iter().any(|f| f.ncols() == 0) {
            return Err(Error::InvalidDecomposition("zero projection".into()));
        }
        Ok(SpectralDecomposition { eigenvalues, projections, frames })
    }

    /// `diag(λ_1 I_{m_1}, λ_2 I_{m_2}, …)` in the standard basis.
    pub fn diagonal(eigenvalues: &[f64], multiplicities: &[usize]) -> Result<Self> {
        if eigenvalues.len() != multiplicities.len() || multiplicities.iter().any(|&m| m == 0) {
            return Err(Error::InvalidDecomposition("bad multiplicities".into()));
        }
        let n: usize = multiplicities.iter().sum();
        let mut offset = 0;
        let mut projections = Vec::new();
        for &m in multiplicities {
            let d: Vec<f64> = (0..n).map(|k| if k >= offset && k < offset + m { 1.0 } else { 0.0 }).collect();
            projections.push(HermMatrix::from_real_diagonal(&d));
            offset += m;
        }
        Self::from_parts(eigenvalues.to_vec(), projections)
    }

    pub fn dim(&self) -> usize {
        self.projections[0].dim()
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn projections(&self) -> &[HermMatrix] {
        &self.projections
    }

    pub fn block_sizes(&self) -> Vec<usize> {
        self.frames.iter().map(|f| f.ncols()).collect()
    }

    /// `Σ λ_i p_i`
    pub fn matrix(&self) -> HermMatrix {
        let n = self.dim();
        let mut a = CMat::zeros(n, n);
        for (l, p) in self.eigenvalues.iter().zip(&self.projections) {
            a += p.as_mat() * C64::new(*l, 0.0);
        }
        HermMatrix::symmetrized(a)
    }

    /// The unique block of largest dimension, if there is one.
    pub fn distinguished_block(&self) -> Option<usize> {
        let sizes = self.block_sizes();
        let max = *sizes.iter().max()?;
        let winners: Vec<usize> = (0..sizes.len()).filter(|&k| sizes[k] == max).collect();
        (winners.len() == 1).then(|| winners[0])
    }

    /// Decomposition of `uAu*`.
    pub fn conjugated(&self, u: &UnitaryMatrix) -> Self {
        SpectralDecomposition {
            eigenvalues: self.eigenvalues.clone(),
            projections: self.projections.iter().map(|p| HermMatrix::symmetrized(u.conjugate(p.as_mat()))).collect(),
            frames: self.frames.iter().map(|f| u.as_mat() * f).collect(),
        }
    }

    /// Unitary whose columns are the concatenated frames, in `order`.
    fn basis_in(&self, order: &[usize]) -> (CMat, Vec<Block>) {
        let n = self.dim();
        let mut v = CMat::zeros(n, n);
        let mut blocks = Vec::new();
        let mut offset = 0;
        for &k in order {
            let f = &self.frames[k];
            v.view_mut((0, offset), (n, f.ncols())).copy_from(f);
            blocks.push(Block { offset, size: f.ncols() });
            offset += f.ncols();
        }
        (v, blocks)
    }

    fn basis(&self) -> (CMat, Vec<Block>) {
        self.basis_in(&(0..self.len()).collect::<Vec<_>>())
    }

    /// Largest violation of the decomposition invariants.
    pub fn residual(&self) -> f64 {
        let n = self.dim();
        let mut worst: f64 = 0.0;
        let mut sum = CMat::zeros(n, n);
        for (i, p) in self.projections.iter().enumerate() {
            worst = worst.max(frobenius(&(p.as_mat() * p.as_mat() - p.as_mat())));
            for q in &self.projections[i + 1..] {
                worst = worst.max(frobenius(&(p.as_mat() * q.as_mat())));
            }
            sum += p.as_mat();
        }
        worst.max(frobenius(&(sum - CMat::identity(n, n))))
    }
}

/// `P_A(x) = Σ p_i x p_i`
pub fn kernel_projection(spec: &SpectralDecomposition, x: &CMat) -> CMat {
    let n = spec.dim();
    let mut out = CMat::zeros(n, n);
    for p in spec.projections() {
        out += p.as_mat() * x * p.as_mat();
    }
    out
}

/// `max_i ‖p_i w p_i‖ ≤ 1e-9·‖w‖`
pub fn range_membership(spec: &SpectralDecomposition, w: &CMat) -> bool {
    range_residual(spec, w) <= 1e-9 * operator_norm(w)
}

fn range_residual(spec: &SpectralDecomposition, w: &CMat) -> f64 {
    spec.projections().iter().map(|p| operator_norm(&(p.as_mat() * w * p.as_mat()))).fold(0.0, f64::max)
}

/// Constants in `C‖x − P_A(x)‖ ≤ ‖δ_A(x)‖`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivationGap {
    /// `min_{i≠j} |λ_i − λ_j|`
    pub gap: f64,
    /// Smallest nonzero singular value of `δ_A` on `M_n(ℂ)` with the 2-norm.
    pub singular_value: f64,
}

pub fn derivation_gap(spec: &SpectralDecomposition) -> Result<DerivationGap> {
    if spec.len() < 2 {
        return Err(Error::SingleEigenvalue);
    }
    let l = spec.eigenvalues();
    let mut gap = f64::INFINITY;
    for i in 0..l.len() {
        for j in i + 1..l.len() {
            gap = gap.min((l[i] - l[j]).abs());
        }
    }
    // vec(yA − Ay) = (Aᵀ ⊗ 1 − 1 ⊗ A) vec(y) for column-major vec
    let a = spec.matrix();
    let a = a.as_mat();
    let n = spec.dim();
    let op = CMat::from_fn(n * n, n * n, |r, c| {
        let (i, j) = (r % n, r / n);
        let (k, l) = (c % n, c / n);
        let mut v = C64::new(0.0, 0.0);
        if i == k {
            v += a[(l, j)];
        }
        if j == l {
            v -= a[(i, k)];
        }
        v
    });
    let sv = singular_values(&op);
    let top = sv.iter().copied().fold(0.0, f64::max);
    let singular_value = sv.into_iter().filter(|&s| s > 1e-9 * top).fold(f64::INFINITY, f64::min);
    Ok(DerivationGap { gap, singular_value })
}

/// Smallest observed ratio `‖δ_A(x)‖ / ‖x − P_A(x)‖` in the operator norm over
/// random `x`.
pub fn operator_gap_estimate<R: Rng + ?Sized>(spec: &SpectralDecomposition, samples: usize, rng: &mut R) -> Result<f64> {
    if spec.len() < 2 {
        return Err(Error::SingleEigenvalue);
    }
    let a = spec.matrix();
    let n = spec.dim();
    let mut best = f64::INFINITY;
    for _ in 0..samples {
        let x = crate::sampling::gaussian_matrix(n, n, rng);
        let off = &x - kernel_projection(spec, &x);
        let den = operator_norm(&off);
        if den > 0.0 {
            best = best.min(operator_norm(&delta(a.as_mat(), &x)) / den);
        }
    }
    Ok(best)
}

/// `θ(uAu*) = u·Ω(P_A(u*))`, a local cross section of `u ↦ uAu*`.
pub fn cross_section_theta(spec: &SpectralDecomposition, u: &UnitaryMatrix) -> Result<UnitaryMatrix> {
    ensure_same_dim(spec.dim(), u.dim())?;
    let a = spec.matrix();
    if spec.len() > 1 {
        let c = derivation_gap(spec)?.gap;
        let dist = operator_norm(&(u.conjugate(a.as_mat()) - a.as_mat()));
        if dist >= c {
            return Err(Error::OutsideSection(format!("‖uAu* − A‖ = {dist} not below C = {c}")));
        }
    }
    let g = kernel_projection(spec, &u.adjoint().into_inner());
    match polar_unitary_part(&g) {
        Ok(omega) => Ok(u.mul(&omega)),
        Err(Error::Singular(s)) => Err(Error::OutsideSection(format!("P_A(u*) is singular (σ_min = {s})"))),
        Err(e) => Err(e),
    }
}

/// Result of the minimal-norm completion of `[[X, Y], [Y*, ?]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DkwCompletion {
    pub z: HermMatrix,
    /// `‖[X Y]‖`
    pub mu: f64,
    /// `‖[[X, Y], [Y*, Z]]‖`
    pub completed_norm: f64,
}

/// Completes `[[X, Y], [Y*, Z]]` with the smallest possible operator norm,
/// `Z = −Y* X (μ² − X²)⁻¹ Y`, `μ = ‖[X Y]‖`.
///
/// `μ²` is shifted by `1e-10·μ²` so the inverse exists when `‖X‖ = μ`; the
/// completed norm then exceeds `μ` by at most about `5e-11·μ`.
pub fn dkw_complete(x: &HermMatrix, y: &CMat) -> Result<DkwCompletion> {
    let k = x.dim();
    if y.nrows() != k {
        return Err(Error::DimensionMismatch { expected: k, got: y.nrows() });
    }
    let m = y.ncols();
    let mut row = CMat::zeros(k, k + m);
    row.view_mut((0, 0), (k, k)).copy_from(x.as_mat());
    row.view_mut((0, k), (k, m)).copy_from(y);
    let mu = operator_norm(&row);
    if mu == 0.0 {
        return Ok(DkwCompletion { z: HermMatrix::zeros(m), mu, completed_norm: 0.0 });
    }
    let (xi, v) = x.eigh();
    let shifted = mu * mu * (1.0 + 1e-10);
    // X(μ² − X²)⁻¹ = V diag(ξ/(μ² − ξ²)) V*
    let mut vd = v.clone();
    for (j, &l) in xi.iter().enumerate() {
        let f = l / (shifted - l * l);
        for i in 0..k {
            vd[(i, j)] *= f;
        }
    }
    let core = &vd * v.adjoint();
    let z = HermMatrix::symmetrized(-(y.adjoint() * core * y));
    let completed_norm = operator_norm(&block_matrix(x.as_mat(), y, z.as_mat()));
    Ok(DkwCompletion { z, mu, completed_norm })
}

fn block_matrix(x: &CMat, y: &CMat, z: &CMat) -> CMat {
    let (k, m) = (x.nrows(), z.nrows());
    let mut out = CMat::zeros(k + m, k + m);
    out.view_mut((0, 0), (k, k)).copy_from(x);
    out.view_mut((0, k), (k, m)).copy_from(y);
    out.view_mut((k, 0), (m, k)).copy_from(&y.adjoint());
    out.view_mut((k, k), (m, m)).copy_from(z);
    out
}

/// A tangent vector `x = δ_b(z)` at `b`, together with one lifting `z`.
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitTangent {
    base: SpectralDecomposition,
    x: HermMatrix,
    lifting: AntiHermMatrix,
}

impl OrbitTangent {
    pub fn from_lifting(base: &SpectralDecomposition, z: &AntiHermMatrix) -> Result<Self> {
        ensure_same_dim(base.dim(), z.dim())?;
        let x = HermMatrix::symmetrized(delta(base.matrix().as_mat(), z.as_mat()));
        Ok(OrbitTangent { base: base.clone(), x, lifting: z.clone() })
    }

    /// Checks range membership and attaches the canonical lifting
    /// `y_ij = x_ij/(λ_j − λ_i)` across blocks, zero within blocks.
    pub fn from_vector(base: &SpectralDecomposition, x: &HermMatrix) -> Result<Self> {
        ensure_same_dim(base.dim(), x.dim())?;
        if !range_membership(base, x.as_mat()) {
            let scale = operator_norm(x.as_mat()).max(1e-300);
            return Err(Error::NotTangent(range_residual(base, x.as_mat()) / scale));
        }
        let lifting = canonical_lifting(base, x.as_mat());
        Ok(OrbitTangent { base: base.clone(), x: x.clone(), lifting })
    }

    pub fn base(&self) -> &SpectralDecomposition {
        &self.base
    }

    pub fn vector(&self) -> &HermMatrix {
        &self.x
    }

    pub fn lifting(&self) -> &AntiHermMatrix {
        &self.lifting
    }

    /// The tangent `uxu*` at `ubu*`.
    pub fn conjugated(&self, u: &UnitaryMatrix) -> Self {
        OrbitTangent {
            base: self.base.conjugated(u),
            x: HermMatrix::symmetrized(u.conjugate(self.x.as_mat())),
            lifting: self.lifting.conjugate_by(u),
        }
    }
}

fn canonical_lifting(base: &SpectralDecomposition, x: &CMat) -> AntiHermMatrix {
    let (v, blocks) = base.basis();
    let mut owner = vec![0; base.dim()];
    for (k, b) in blocks.iter().enumerate() {
        owner[b.offset..b.offset + b.size].iter_mut().for_each(|o| *o = k);
    }
    let xt = v.adjoint() * x * &v;
    let l = base.eigenvalues();
    let n = base.dim();
    let y = CMat::from_fn(n, n, |i, j| {
        if owner[i] == owner[j] {
            C64::new(0.0, 0.0)
        } else {
            xt[(i, j)] / (l[owner[j]] - l[owner[i]])
        }
    });
    AntiHermMatrix::skewed(&v * y * v.adjoint())
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuotientOptions {
    pub solver: QuotientSolver,
    /// Which kernel blocks may be varied; `None` frees all of them.
    pub free_blocks: Option<Vec<bool>>,
}

impl Default for QuotientOptions {
    fn default() -> Self {
        QuotientOptions { solver: QuotientSolver::InteriorPoint, free_blocks: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuotientSolution {
    pub norm: f64,
    pub lifting: AntiHermMatrix,
    pub iterations: usize,
    /// Certified bound on the distance to the optimum, when the solver gives one.
    pub gap: Option<f64>,
}

fn check_tangent(spec: &SpectralDecomposition, tangent: &OrbitTangent) -> Result<()> {
    ensure_same_dim(spec.dim(), tangent.base.dim())?;
    let scale = operator_norm(tangent.x.as_mat());
    let residual = range_residual(spec, tangent.x.as_mat());
    if residual > 1e-9 * scale {
        return Err(Error::NotTangent(residual / scale.max(1e-300)));
    }
    Ok(())
}

/// `min ‖z + d‖` over block-diagonal anti-Hermitian `d`.
pub fn quotient_solve(
    spec: &SpectralDecomposition,
    tangent: &OrbitTangent,
    options: &QuotientOptions,
) -> Result<QuotientSolution> {
    check_tangent(spec, tangent)?;
    if let Some(mask) = &options.free_blocks {
        if mask.len() != spec.len() {
            return Err(Error::DimensionMismatch { expected: spec.len(), got: mask.len() });
        }
    }
    let (v, blocks) = spec.basis();
    let free: Vec<Block> = blocks
        .iter()
        .enumerate()
        .filter(|(k, _)| options.free_blocks.as_ref().is_none_or(|m| m[*k]))
        .map(|(_, b)| *b)
        .collect();
    let h = (v.adjoint() * tangent.lifting.as_mat() * &v).map(|z| z * -I);
    let h = (&h + h.adjoint()) * C64::new(0.5, 0.0);
    let r = quotient::minimize(&h, &free, options.solver);
    let lifting = AntiHermMatrix::skewed(&v * r.matrix.map(|z| z * I) * v.adjoint());
    Ok(QuotientSolution { norm: operator_norm(lifting.as_mat()), lifting, iterations: r.iterations, gap: r.gap })
}

/// `‖x‖_b = inf{‖y‖ : δ_b(y) = x}`.
pub fn quotient_norm(spec: &SpectralDecomposition, tangent: &OrbitTangent) -> Result<f64> {
    Ok(quotient_solve(spec, tangent, &QuotientOptions::default())?.norm)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LiftingPipeline {
    Zero,
    /// Two blocks: the lifting vanishing on both diagonal blocks is minimal.
    Codiagonal,
    /// General minimizer, then the distinguished block is stripped and refilled
    /// by the minimal-norm completion.
    Completion,
    General,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSlack {
    /// `min_t ‖z_c + td‖ − ‖z_c‖`
    pub norm_slack: f64,
    /// `min_t ‖log(e^{z_c} e^{td})‖ − ‖z_c‖`
    pub distance_slack: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimalityCertificate {
    pub slacks: Vec<KernelSlack>,
    pub min_norm_slack: f64,
    pub min_distance_slack: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinimalLifting {
    pub z_c: AntiHermMatrix,
    pub quotient_norm: f64,
    pub pipeline: LiftingPipeline,
    pub certificate: Option<MinimalityCertificate>,
}

pub fn minimal_lifting(spec: &SpectralDecomposition, tangent: &OrbitTangent) -> Result<MinimalLifting> {
    minimal_lifting_with(spec, tangent, &QuotientOptions::default())
}

pub fn minimal_lifting_with(
    spec: &SpectralDecomposition,
    tangent: &OrbitTangent,
    options: &QuotientOptions,
) -> Result<MinimalLifting> {
    check_tangent(spec, tangent)?;
    let n = spec.dim();
    let done = |z: AntiHermMatrix, pipeline| {
        let quotient_norm = operator_norm(z.as_mat());
        Ok(MinimalLifting { z_c: z, quotient_norm, pipeline, certificate: None })
    };
    if operator_norm(tangent.x.as_mat()) == 0.0 || spec.len() == 1 {
        return done(AntiHermMatrix::zeros(n), LiftingPipeline::Zero);
    }
    if spec.len() == 2 {
        // any lifting contains the off-diagonal block, whose norm the
        // co-diagonal lifting attains
        return done(canonical_lifting(spec, tangent.x.as_mat()), LiftingPipeline::Codiagonal);
    }
    let general = quotient_solve(spec, tangent, options)?;
    let Some(p0) = spec.distinguished_block() else {
        return done(general.lifting, LiftingPipeline::General);
    };
    let order: Vec<usize> = (0..spec.len()).filter(|&k| k != p0).chain(std::iter::once(p0)).collect();
    let (v, _) = spec.basis_in(&order);
    let r = n - spec.block_sizes()[p0];
    let h = (v.adjoint() * general.lifting.as_mat() * &v).map(|z| z * -I);
    let x = HermMatrix::symmetrized(h.view((0, 0), (r, r)).into_owned());
    let y = h.view((0, r), (r, n - r)).into_owned();
    let completion = dkw_complete(&x, &y)?;
    let full = block_matrix(x.as_mat(), &y, completion.z.as_mat());
    let z = AntiHermMatrix::skewed(&v * full.map(|c| c * I) * v.adjoint());
    done(z, LiftingPipeline::Completion)
}

/// Source of random kernel directions at a base point.
pub trait KernelSampler {
    fn dim(&self) -> usize;
    fn sample_kernel(&self, rng: &mut dyn rand::RngCore) -> AntiHermMatrix;
}

impl KernelSampler for SpectralDecomposition {
    fn dim(&self) -> usize {
        SpectralDecomposition::dim(self)
    }

    /// Block-diagonal Gaussian anti-Hermitian matrix, unit operator norm.
    fn sample_kernel(&self, rng: &mut dyn rand::RngCore) -> AntiHermMatrix {
        let g = random_anti_herm(self.dim(), rng);
        let d = AntiHermMatrix::skewed(kernel_projection(self, g.as_mat()));
        let s = operator_norm(d.as_mat());
        if s == 0.0 {
            d
        } else {
            d.scale(1.0 / s)
        }
    }
}

const PROBE_STEPS: [f64; 6] = [1.0, -1.0, 0.5, -0.5, 0.1, -0.1];

/// Samples kernel directions and checks that neither the lifting norm nor the
/// distance from the identity decreases when `z_c` is moved along them.
///
/// `extra` directions are probed in addition to the random ones.
pub fn minimality_probe<K: KernelSampler + ?Sized, R: Rng>(
    kernel: &K,
    z_c: &AntiHermMatrix,
    directions: usize,
    extra: &[AntiHermMatrix],
    grid: usize,
    rng: &mut R,
) -> Result<MinimalityCertificate> {
    ensure_same_dim(kernel.dim(), z_c.dim())?;
    let norm = operator_norm(z_c.as_mat());
    if norm >= PI / 2.0 {
        return Err(Error::NormTooLarge(norm));
    }
    let mut dirs: Vec<AntiHermMatrix> = extra
        .iter()
        .map(|d| {
            let s = operator_norm(d.as_mat());
            if s == 0.0 {
                d.clone()
            } else {
                d.scale(1.0 / s)
            }
        })
        .collect();
    for _ in 0..directions {
        dirs.push(kernel.sample_kernel(rng));
    }
    let base = z_c.exp();
    let f0 = log_norm(&base, FinslerNorm::operator())?;
    let ts: Vec<f64> = (0..grid.max(2)).map(|k| -1.0 + 2.0 * k as f64 / (grid.max(2) - 1) as f64).collect();
    let mut slacks = Vec::with_capacity(dirs.len());
    for d in &dirs {
        let norm_slack = PROBE_STEPS
            .iter()
            .map(|&t| operator_norm(&(z_c.as_mat() + d.as_mat() * C64::new(t, 0.0))) - norm)
            .fold(f64::INFINITY, f64::min);
        // unit directions keep ‖z_c‖ + ‖td‖ < π on the whole grid
        let mut distance_slack = f64::INFINITY;
        for &t in &ts {
            let f = log_norm(&base.mul(&d.scale(t).exp()), FinslerNorm::operator())?;
            distance_slack = distance_slack.min(f - f0);
        }
        slacks.push(KernelSlack { norm_slack, distance_slack });
    }
    let min_norm_slack = slacks.iter().map(|s| s.norm_slack).fold(f64::INFINITY, f64::min);
    let min_distance_slack = slacks.iter().map(|s| s.distance_slack).fold(f64::INFINITY, f64::min);
    Ok(MinimalityCertificate {
        passed: min_norm_slack >= -1e-9 && min_distance_slack >= -1e-7,
        slacks,
        min_norm_slack,
        min_distance_slack,
    })
}

/// Attaches a minimality certificate to a lifting.
pub fn certify<R: Rng>(
    spec: &SpectralDecomposition,
    lifting: &mut MinimalLifting,
    directions: usize,
    rng: &mut R,
) -> Result<bool> {
    let cert = minimality_probe(spec, &lifting.z_c, directions, &[], 21, rng)?;
    let passed = cert.passed;
    lifting.certificate = Some(cert);
    Ok(passed)
}

/// Spread of near-optimal liftings found from random restarts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RestartReport {
    pub restarts: usize,
    pub reached: usize,
    /// Largest Frobenius distance from the reference lifting.
    pub spread: f64,
    pub non_unique: bool,
}

/// Restarts alternating projections at the optimal level from random points and
/// reports whether they land on liftings different from `lifting`.
pub fn restart_report<R: Rng>(
    spec: &SpectralDecomposition,
    lifting: &MinimalLifting,
    restarts: usize,
    rng: &mut R,
) -> Result<RestartReport> {
    ensure_same_dim(spec.dim(), lifting.z_c.dim())?;
    let (v, blocks) = spec.basis();
    let h = (v.adjoint() * lifting.z_c.as_mat() * &v).map(|z| z * -I);
    let h = (&h + h.adjoint()) * C64::new(0.5, 0.0);
    let (reached, spread) = quotient::restart_spread(&h, &blocks, &h, lifting.quotient_norm, restarts, rng);
    Ok(RestartReport { restarts, reached, spread, non_unique: spread > 1e-6 })
}

/// Length of a two-segment unitary path from `e^{d₀}` to `e^{z_c}e^{d₁}`,
/// `d₀, d₁` kernel directions, through a perturbed midpoint. Both ends lie in
/// the fibers of the orbit curve `e^{tz_c} b e^{−tz_c}` at `t = 0, 1`.
pub fn fiber_competitor_length<K: KernelSampler + ?Sized, R: Rng>(
    kernel: &K,
    z_c: &AntiHermMatrix,
    spread: f64,
    rng: &mut R,
) -> Result<f64> {
    let n = kernel.dim();
    let mut last = Error::Solver("no competitor sampled".into());
    for _ in 0..32 {
        let d0 = kernel.sample_kernel(rng).scale(uniform(-spread, spread, rng));
        let d1 = kernel.sample_kernel(rng).scale(uniform(-spread, spread, rng));
        let start = d0.exp();
        let end = z_c.exp().mul(&d1.exp());
        let half = match principal_log_unitary(&start.adjoint().mul(&end)) {
            Ok(w) => w.scale(0.5).exp(),
            Err(e) => {
                last = e;
                continue;
            }
        };
        let r = AntiHermMatrix::skewed(random_unit_matrix(n, n, rng)).scale(uniform(0.0, spread, rng));
        let mid = start.mul(&half).mul(&r.exp());
        match two_segment_length(&start, &mid, &end, FinslerNorm::operator()) {
            Ok(l) => return Ok(l),
            Err(e) => last = e,
        }
    }
    Err(last)
}

/// A smooth curve in an orbit, with a lifting of its velocity.
pub trait OrbitPath {
    fn spectral(&self, t: f64) -> SpectralDecomposition;
    fn tangent(&self, t: f64) -> Result<OrbitTangent>;

    fn point(&self, t: f64) -> HermMatrix {
        self.spectral(t).matrix()
    }
}

/// `γ(t) = U(t) A U(t)*` with `U(t) = e^{tz₁} e^{t²z₂}`.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryConjugationPath {
    pub base: SpectralDecomposition,
    pub z1: AntiHermMatrix,
    pub z2: AntiHermMatrix,
}

impl UnitaryConjugationPath {
    fn unitary(&self, t: f64) -> UnitaryMatrix {
        self.z1.scale(t).exp().mul(&self.z2.scale(t * t).exp())
    }
}

impl OrbitPath for UnitaryConjugationPath {
    fn spectral(&self, t: f64) -> SpectralDecomposition {
        self.base.conjugated(&self.unitary(t))
    }

    /// `γ' = δ_γ(U'U*)` with `U'U* = z₁ + e^{tz₁}(2t z₂)e^{−tz₁}`.
    fn tangent(&self, t: f64) -> Result<OrbitTangent> {
        let omega = self.z1.add(&self.z2.scale(2.0 * t).conjugate_by(&self.z1.scale(t).exp()));
        OrbitTangent::from_lifting(&self.spectral(t), &omega)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseLift {
    pub n_segments: usize,
    /// `Σ‖z_i‖Δt`
    pub unitary_length: f64,
    /// Quotient length of the orbit curve `Ω(t)·a₀·Ω(t)*`, sampled at the grid.
    pub orbit_length: f64,
    /// `‖Ω(1)a₀Ω(1)* − γ(1)‖`
    pub endpoint_error: f64,
    pub lifting_norms: Vec<f64>,
}

/// Product-of-exponentials lift `Ω(t) = e^{(t−t_i)z_i}···e^{t₁z₀}` built from
/// minimal liftings `z_i` of `γ'(t_i)` at `γ(t_i)` on a uniform grid.
pub fn piecewise_lift<P: OrbitPath + ?Sized>(path: &P, n_segments: usize) -> Result<PiecewiseLift> {
    if n_segments == 0 {
        return Err(Error::OutOfRange { index: 0, len: 0 });
    }
    let a0 = path.spectral(0.0);
    let dt = 1.0 / n_segments as f64;
    let mut omega = UnitaryMatrix::identity(a0.dim());
    let mut unitary_length = 0.0;
    let mut orbit_length = 0.0;
    let mut lifting_norms = Vec::with_capacity(n_segments);
    for i in 0..n_segments {
        let t = i as f64 * dt;
        let spec = path.spectral(t);
        let z = minimal_lifting(&spec, &path.tangent(t)?)?;
        unitary_length += z.quotient_norm * dt;
        lifting_norms.push(z.quotient_norm);
        let here = a0.conjugated(&omega);
        orbit_length += quotient_norm(&here, &OrbitTangent::from_lifting(&here, &z.z_c)?)? * dt;
        omega = z.z_c.scale(dt).exp().mul(&omega);
    }
    let end = a0.conjugated(&omega).matrix();
    let endpoint_error = operator_norm(&(end.as_mat() - path.point(1.0).as_mat()));
    Ok(PiecewiseLift { n_segments, unitary_length, orbit_length, endpoint_error, lifting_norms })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CommutatorDecay {
    /// `‖x_k A₀ − A₀ x_k‖₂²`
    pub value: f64,
    /// `(2/k) Σ λ_i²`
    pub bound: f64,
    /// `(2/k²)(k Σλ_i² − (Σλ_i)²)`
    pub closed_form: f64,
}

/// `x_k` is the rank-one projection with entries `1/k` in the leading `k×k`
/// corner; `A₀ = diag(λ)`. Sums run over the first `k` eigenvalues.
pub fn commutator_decay(lambdas: &[f64], k: usize) -> Result<CommutatorDecay> {
    if k == 0 || k > lambdas.len() {
        return Err(Error::OutOfRange { index: k, len: lambdas.len() });
    }
    let n = lambdas.len();
    let x = CMat::from_fn(n, n, |i, j| if i < k && j < k { C64::new(1.0 / k as f64, 0.0) } else { C64::new(0.0, 0.0) });
    let a = CMat::from_fn(n, n, |i, j| if i == j { C64::new(lambdas[i], 0.0) } else { C64::new(0.0, 0.0) });
    let value = frobenius(&(&x * &a - &a * &x)).powi(2);
    let head = &lambdas[..k];
    let sq: f64 = head.iter().map(|l| l * l).sum();
    let sum: f64 = head.iter().sum();
    let kf = k as f64;
    let closed_form = 2.0 / (kf * kf) * (kf * sq - sum * sum);
    if (closed_form - value).abs() > 1e-12 * sq.max(1.0) {
        return Err(Error::Solver(format!("closed form {closed_form} disagrees with {value}")));
    }
    Ok(CommutatorDecay { value, bound: 2.0 / kf * sq, closed_form })
}
