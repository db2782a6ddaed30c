//! Geodesics of the unitary group, the rectifiable distance and the
//! convexity of `s ↦ d(u, β(s))` along a geodesic `β`.
//!
//! Geodesics are the curves `t ↦ u·e^{tz}` with `z` anti-Hermitian. For the
//! operator norm and every Schatten norm they are minimal as long as
//! `‖z‖ ≤ π`, so the distance between two unitaries is the norm of the
//! principal logarithm of `u1* u2`.
//!
//! The convexity machinery follows one probe `β(s) = e^v e^{sz}` with
//! reference point `1`. Writing `w_s = log β(s)`, the function
//! `f_p(s) = ‖w_s‖_p^p` has
//!
//! ```text
//! f_p'(s)  = H_{w_s}(ẇ_s, w_s) / (p − 1)
//! f_p''(s) = H_{w_s}(ẇ_s, z)
//! ```
//!
//! where `ẇ_s` solves `∫₀¹ e^{−t w_s} ẇ_s e^{t w_s} dt = z`. These feed the
//! inequality chain `(p−1)f'² ≤ p f f''/sinc(2‖w‖_p) ≤ p(p−1) f f''`.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    commutator, dexp_inverse, ensure_same_dim, frobenius, principal_log_unitary, unitary_angles, AntiHermMatrix,
    CMat, UnitaryMatrix, C64,
};
use crate::norms::{check_even, hessian_form, FinslerNorm, NormKind};
use crate::sampling::{random_anti_herm_with_norm, random_unit_matrix};

/// Margin below π used to decide whether a probe stays inside the log branch.
pub const BRANCH_MARGIN: f64 = PI - 0.01;

/// Lower threshold on second differences for a `convex` verdict.
pub const CONVEX_TOL: f64 = -1e-7;
/// Second differences at or above this count as strictly positive.
pub const STRICT_TOL: f64 = 1e-10;

/// `u·e^{tz}`
pub fn geodesic_point(u: &UnitaryMatrix, z: &AntiHermMatrix, t: f64) -> UnitaryMatrix {
    u.mul(&z.scale(t).exp())
}

/// Norm of the principal logarithm of `u`, computed from its eigen-angles.
pub fn log_norm(u: &UnitaryMatrix, norm: FinslerNorm) -> Result<f64> {
    let (theta, _, min_dist) = unitary_angles(u);
    if min_dist < 1e-10 {
        return Err(Error::EigenvalueAtMinusOne(min_dist));
    }
    let abs: Vec<f64> = theta.iter().map(|t| t.abs()).collect();
    let top = abs.iter().copied().fold(0.0, f64::max);
    Ok(match norm.kind {
        NormKind::Operator => top,
        _ => {
            if top == 0.0 {
                0.0
            } else {
                let sum: f64 = abs.iter().map(|a| (a / top).powi(norm.p as i32)).sum();
                top * (sum * norm.trace_factor(theta.len())).powf(1.0 / norm.p as f64)
            }
        }
    })
}

/// Rectifiable distance `‖log(u1* u2)‖`.
pub fn rectifiable_distance(u1: &UnitaryMatrix, u2: &UnitaryMatrix, norm: FinslerNorm) -> Result<f64> {
    ensure_same_dim(u1.dim(), u2.dim())?;
    log_norm(&u1.adjoint().mul(u2), norm)
}

/// The geodesic `β(s) = e^v e^{sz}`, `s ∈ [0, 1]`, seen from the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct GeodesicProbe {
    pub v: AntiHermMatrix,
    pub z: AntiHermMatrix,
}

impl GeodesicProbe {
    pub fn new(v: AntiHermMatrix, z: AntiHermMatrix) -> Result<Self> {
        ensure_same_dim(v.dim(), z.dim())?;
        Ok(GeodesicProbe { v, z })
    }

    pub fn dim(&self) -> usize {
        self.v.dim()
    }

    pub fn point(&self, s: f64) -> UnitaryMatrix {
        self.v.exp().mul(&self.z.scale(s).exp())
    }

    pub fn is_constant(&self) -> bool {
        frobenius(self.z.as_mat()) <= 1e-14
    }

    /// The identity lies on a prolongation of the probe: `v` and `z` commute
    /// and `v` is a real multiple of `z`.
    pub fn is_aligned(&self) -> bool {
        let nv = frobenius(self.v.as_mat());
        let nz = frobenius(self.z.as_mat());
        if nz == 0.0 {
            return true;
        }
        if frobenius(&commutator(self.v.as_mat(), self.z.as_mat())) > 1e-10 * (nv * nz).max(1e-300) {
            return false;
        }
        let inner: f64 = self.z.as_mat().iter().zip(self.v.as_mat().iter()).map(|(a, b)| (a.conj() * b).re).sum();
        let c = inner / (nz * nz);
        frobenius(&(self.v.as_mat() - self.z.as_mat().map(|x| x * c))) <= 1e-10 * nv.max(1.0)
    }

    /// Largest operator norm of `w_s` over a uniform grid.
    pub fn max_log_norm(&self, gridsize: usize) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for s in uniform_grid(gridsize) {
            worst = worst.max(log_norm(&self.point(s), FinslerNorm::operator())?);
        }
        Ok(worst)
    }

    /// `max_s ‖w_s‖ < π − 0.01` on the grid.
    pub fn is_valid(&self, gridsize: usize) -> bool {
        matches!(self.max_log_norm(gridsize), Ok(m) if m < BRANCH_MARGIN)
    }

    /// Compression `q v q`, `q z q` by the coordinate projection onto the first
    /// `rank` basis vectors.
    pub fn compress(&self, rank: usize) -> GeodesicProbe {
        let n = self.dim();
        let cut = |m: &CMat| CMat::from_fn(n, n, |i, j| if i < rank && j < rank { m[(i, j)] } else { C64::new(0.0, 0.0) });
        GeodesicProbe { v: AntiHermMatrix::skewed(cut(self.v.as_mat())), z: AntiHermMatrix::skewed(cut(self.z.as_mat())) }
    }

    /// The same geodesic seen from `u`: `u* e^v e^{sz} = e^{v'} e^{sz}`.
    pub fn translated(&self, u: &UnitaryMatrix) -> Result<GeodesicProbe> {
        let v = principal_log_unitary(&u.adjoint().mul(&self.v.exp()))?;
        GeodesicProbe::new(v, self.z.clone())
    }
}

pub fn uniform_grid(gridsize: usize) -> Vec<f64> {
    let n = gridsize.max(2);
    (0..n).map(|i| i as f64 / (n - 1) as f64).collect()
}

/// `w_s = log β(s)` and its derivative `ẇ_s`.
#[derive(Debug, Clone, PartialEq)]
pub struct LogCurvePoint {
    pub w: AntiHermMatrix,
    pub wdot: AntiHermMatrix,
}

pub fn log_curve(probe: &GeodesicProbe, s: f64) -> Result<LogCurvePoint> {
    let w = principal_log_unitary(&probe.point(s))?;
    let wdot = dexp_inverse(&w, &probe.z)?;
    Ok(LogCurvePoint { w, wdot })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FpDerivatives {
    pub f: f64,
    pub df: f64,
    pub d2f: f64,
    /// `‖w_s‖_p` for the trace in use.
    pub w_norm_p: f64,
    /// `‖w_s‖`
    pub w_norm_op: f64,
}

fn fp_with_factor(probe: &GeodesicProbe, s: f64, p: u32, factor: f64) -> Result<FpDerivatives> {
    check_even(p, 4)?;
    let LogCurvePoint { w, wdot } = log_curve(probe, s)?;
    let (theta, _) = w.eig();
    let f = factor * theta.iter().map(|t| t.abs().powi(p as i32)).sum::<f64>();
    let df = factor * hessian_form(&w, &wdot, &w, p)? / (p as f64 - 1.0);
    let d2f = factor * hessian_form(&w, &wdot, &probe.z, p)?;
    Ok(FpDerivatives {
        f,
        df,
        d2f,
        w_norm_p: f.powf(1.0 / p as f64),
        w_norm_op: theta.iter().map(|t| t.abs()).fold(0.0, f64::max),
    })
}

/// `f_p(s) = ‖w_s‖_p^p` and its first two derivatives (standard trace).
pub fn f_p_derivatives(probe: &GeodesicProbe, s: f64, p: u32) -> Result<FpDerivatives> {
    fp_with_factor(probe, s, p, 1.0)
}

/// Same as [`f_p_derivatives`] for the trace of `norm` (standard or `Tr/dim`).
pub fn f_p_derivatives_for(probe: &GeodesicProbe, s: f64, norm: FinslerNorm) -> Result<FpDerivatives> {
    fp_with_factor(probe, s, norm.p, norm.trace_factor(probe.dim()))
}

/// `sin(r)/r`, with `sinc(0) = 1`.
pub fn sinc(r: f64) -> f64 {
    if r.abs() < 1e-8 {
        1.0 - r * r / 6.0
    } else {
        r.sin() / r
    }
}

/// Inverse of `sinc` on `[0, π]`, by bisection.
pub fn sinc_inverse(y: f64) -> Result<f64> {
    if !(y > 0.0 && y <= 1.0) {
        return Err(Error::DomainError(y));
    }
    if y == 1.0 {
        return Ok(0.0);
    }
    let (mut lo, mut hi) = (0.0_f64, PI);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if sinc(mid) > y {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvexityRadius {
    /// `½·sinc⁻¹(1/(p−1))`
    pub paper: f64,
    /// `min(paper, π/4 − 1e-6)`, the ball used for probe validity.
    pub conservative: f64,
}

pub fn convexity_radius(p: u32) -> Result<ConvexityRadius> {
    check_even(p, 4)?;
    let paper = 0.5 * sinc_inverse(1.0 / (p as f64 - 1.0))?;
    Ok(ConvexityRadius { paper, conservative: paper.min(PI / 4.0 - 1e-6) })
}

/// The three members `(A, B, C)` of
/// `(p−1)f'² ≤ p f f''/sinc(2‖w‖) ≤ p(p−1) f f''` at one parameter value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainSlack {
    pub s: f64,
    pub lhs: f64,
    pub mid: f64,
    pub rhs: f64,
    pub d2f: f64,
    pub tol: f64,
}

impl ChainSlack {
    fn new(s: f64, lhs: f64, mid: f64, rhs: f64, d2f: f64) -> Self {
        let tol = 1e-8 * lhs.abs().max(mid.abs()).max(rhs.abs()).max(1.0);
        ChainSlack { s, lhs, mid, rhs, d2f, tol }
    }

    pub fn left_slack(&self) -> f64 {
        self.mid - self.lhs
    }

    pub fn right_slack(&self) -> f64 {
        self.rhs - self.mid
    }

    pub fn holds(&self) -> bool {
        self.lhs <= self.mid + self.tol && self.mid <= self.rhs + self.tol
    }

    /// Equality (within tolerance) in the last member.
    pub fn last_term_tight(&self) -> bool {
        self.right_slack() < self.tol
    }
}

/// Which trace and ball the inequality chain is evaluated for.
fn chain_at(probe: &GeodesicProbe, s: f64, norm: FinslerNorm, radius: f64) -> Result<ChainSlack> {
    let p = norm.p;
    if probe.is_constant() {
        return Err(Error::OutOfDomain("constant geodesic".into()));
    }
    if probe.is_aligned() {
        return Err(Error::OutOfDomain("reference point lies on a prolongation of the geodesic".into()));
    }
    let d = f_p_derivatives_for(probe, s, norm)?;
    // standard trace: p-norm ball; normalized trace: uniform ball
    let ball_norm = match norm.kind {
        NormKind::NormalizedSchattenP => d.w_norm_op,
        _ => d.w_norm_p,
    };
    if ball_norm >= radius {
        return Err(Error::OutOfDomain(format!("‖w_s‖ = {ball_norm} outside ball of radius {radius}")));
    }
    let pf = p as f64;
    let lhs = (pf - 1.0) * d.df * d.df;
    let mid = pf * d.f * d.d2f / sinc(2.0 * ball_norm);
    let rhs = pf * (pf - 1.0) * d.f * d.d2f;
    Ok(ChainSlack::new(s, lhs, mid, rhs, d.d2f))
}

/// Inequality chain for the standard trace inside the conservative ball.
pub fn verify_theorem23(probe: &GeodesicProbe, s: f64, p: u32) -> Result<ChainSlack> {
    let radius = convexity_radius(p)?.conservative;
    chain_at(probe, s, FinslerNorm::schatten(p)?, radius)
}

/// Inequality chain with an explicit norm (standard or normalized trace) and ball radius.
pub fn verify_inequality_chain(probe: &GeodesicProbe, s: f64, norm: FinslerNorm, radius: f64) -> Result<ChainSlack> {
    if norm.kind == NormKind::Operator {
        return Err(Error::InvalidExponent(0, 4));
    }
    check_even(norm.p, 4)?;
    chain_at(probe, s, norm, radius)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Convex,
    StrictlyConvex,
    Violated,
    OutOfDomain,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Convex => "convex",
            Verdict::StrictlyConvex => "strictly_convex",
            Verdict::Violated => "violated",
            Verdict::OutOfDomain => "out_of_domain",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexityReport {
    pub grid: Vec<f64>,
    pub g_values: Vec<f64>,
    /// `g(s−h) − 2g(s) + g(s+h)` at interior grid points.
    pub second_differences: Vec<f64>,
    pub min_second_difference: f64,
    /// Interior points whose second difference is below [`STRICT_TOL`].
    pub non_strict_points: usize,
    pub inequality_slacks: Vec<ChainSlack>,
    pub verdict: Verdict,
}

/// Ball radius of the convexity statements for each norm kind.
pub fn domain_radius(norm: FinslerNorm) -> Result<f64> {
    Ok(match norm.kind {
        NormKind::Operator => PI / 2.0,
        _ if norm.p == 2 => PI / 2.0,
        _ => convexity_radius(norm.p)?.conservative,
    })
}

/// Samples `g(s) = d(u, β(s))` on a uniform grid and classifies its convexity.
///
/// The domain is `d_∞(u, β(s)) < π/2` for the operator norm (and for `p = 2`,
/// which has no convexity statement of its own), the conservative ball in the
/// p-norm for the standard trace, and the conservative uniform ball for the
/// normalized trace.
pub fn convexity_probe(
    u: &UnitaryMatrix,
    probe: &GeodesicProbe,
    norm: FinslerNorm,
    gridsize: usize,
) -> Result<ConvexityReport> {
    convexity_probe_with_radius(u, probe, norm, gridsize, domain_radius(norm)?)
}

pub fn convexity_probe_with_radius(
    u: &UnitaryMatrix,
    probe: &GeodesicProbe,
    norm: FinslerNorm,
    gridsize: usize,
    radius: f64,
) -> Result<ConvexityReport> {
    ensure_same_dim(u.dim(), probe.dim())?;
    let grid = uniform_grid(gridsize);
    let uadj = u.adjoint();
    let ball_norm = match norm.kind {
        NormKind::SchattenP if norm.p >= 4 => norm,
        _ => FinslerNorm::operator(),
    };
    let mut g_values = Vec::with_capacity(grid.len());
    for &s in &grid {
        let rel = uadj.mul(&probe.point(s));
        let dist = log_norm(&rel, ball_norm)?;
        if dist >= radius {
            return Err(Error::OutOfDomain(format!("distance {dist} at s = {s} not below {radius}")));
        }
        g_values.push(if ball_norm == norm { dist } else { log_norm(&rel, norm)? });
    }
    let second_differences: Vec<f64> = g_values.windows(3).map(|w| w[0] - 2.0 * w[1] + w[2]).collect();
    let min_second_difference = second_differences.iter().copied().fold(f64::INFINITY, f64::min);
    let non_strict_points = second_differences.iter().filter(|&&d| d < STRICT_TOL).count();

    let mut inequality_slacks = Vec::new();
    if norm.kind != NormKind::Operator && norm.p >= 4 {
        let rel = probe.translated(u)?;
        if !rel.is_constant() && !rel.is_aligned() {
            for &s in &grid {
                inequality_slacks.push(chain_at(&rel, s, norm, radius)?);
            }
        }
    }

    let verdict = if min_second_difference < CONVEX_TOL {
        Verdict::Violated
    } else if non_strict_points <= 1 {
        Verdict::StrictlyConvex
    } else {
        Verdict::Convex
    };
    Ok(ConvexityReport {
        grid,
        g_values,
        second_differences,
        min_second_difference,
        non_strict_points,
        inequality_slacks,
        verdict,
    })
}

/// Convexity evidence for the Hilbert–Schmidt distance `g₂`. Violations are
/// reported, not raised.
pub fn probe_g2(probe: &GeodesicProbe, gridsize: usize) -> Result<ConvexityReport> {
    let n = probe.dim();
    convexity_probe(&UnitaryMatrix::identity(n), probe, FinslerNorm::schatten(2)?, gridsize)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompressionRow {
    pub rank: usize,
    pub s: f64,
    /// `(p, ‖w_{r,s}‖_p)`
    pub p_norms: Vec<(u32, f64)>,
    pub operator: f64,
    /// `‖w_{r,s} − w_s‖`
    pub distance_to_full: f64,
}

impl CompressionRow {
    /// `‖w‖_p` nonincreasing along the p list (ascending p assumed).
    pub fn is_monotone(&self, tol: f64) -> bool {
        self.p_norms.windows(2).all(|w| w[1].1 <= w[0].1 + tol)
    }

    /// `‖w‖ ≤ ‖w‖_p ≤ rank^{1/p}‖w‖` for every p in the list.
    pub fn within_rank_factor(&self, tol: f64) -> bool {
        let r = self.rank.max(1) as f64;
        self.p_norms
            .iter()
            .all(|&(p, v)| v + tol >= self.operator && v <= r.powf(1.0 / p as f64) * self.operator + tol)
    }
}

/// Compresses the probe to leading coordinate blocks and tabulates the
/// Schatten norms of the compressed logarithms against the operator norm.
pub fn compression_limit_probe(
    probe: &GeodesicProbe,
    ranks: &[usize],
    p_list: &[u32],
    s_values: &[f64],
) -> Result<Vec<CompressionRow>> {
    for &p in p_list {
        check_even(p, 2)?;
    }
    let full: Vec<AntiHermMatrix> =
        s_values.iter().map(|&s| principal_log_unitary(&probe.point(s))).collect::<Result<_>>()?;
    let mut rows = Vec::new();
    for &rank in ranks {
        if rank == 0 || rank > probe.dim() {
            return Err(Error::OutOfRange { index: rank, len: probe.dim() });
        }
        let compressed = probe.compress(rank);
        for (k, &s) in s_values.iter().enumerate() {
            let w = principal_log_unitary(&compressed.point(s))?;
            let (theta, _) = w.eig();
            let operator = theta.iter().map(|t| t.abs()).fold(0.0, f64::max);
            let p_norms = p_list
                .iter()
                .map(|&p| {
                    let v = if operator == 0.0 {
                        0.0
                    } else {
                        let sum: f64 = theta.iter().map(|t| (t.abs() / operator).powi(p as i32)).sum();
                        operator * sum.powf(1.0 / p as f64)
                    };
                    (p, v)
                })
                .collect();
            let distance_to_full = crate::norms::operator_norm(&(w.as_mat() - full[k].as_mat()));
            rows.push(CompressionRow { rank, s, p_norms, operator, distance_to_full });
        }
    }
    Ok(rows)
}

/// Length of a sampled curve: sum of the distances between consecutive
/// samples (left-translated finite differences through the logarithm).
pub fn path_length(samples: &[UnitaryMatrix], norm: FinslerNorm) -> Result<f64> {
    samples.windows(2).map(|w| rectifiable_distance(&w[0], &w[1], norm)).sum()
}

/// Length of the two-segment geodesic path `start → mid → end`.
pub fn two_segment_length(
    start: &UnitaryMatrix,
    mid: &UnitaryMatrix,
    end: &UnitaryMatrix,
    norm: FinslerNorm,
) -> Result<f64> {
    Ok(rectifiable_distance(start, mid, norm)? + rectifiable_distance(mid, end, norm)?)
}

/// Length of a two-segment geodesic path from `u1` to `u2` through a random
/// midpoint: the geodesic midpoint perturbed by `e^{scale·r}`, `‖r‖ = 1`.
pub fn random_competitor_length<R: Rng + ?Sized>(
    u1: &UnitaryMatrix,
    u2: &UnitaryMatrix,
    norm: FinslerNorm,
    scale: f64,
    rng: &mut R,
) -> Result<f64> {
    ensure_same_dim(u1.dim(), u2.dim())?;
    let n = u1.dim();
    let half = principal_log_unitary(&u1.adjoint().mul(u2))?.scale(0.5).exp();
    let mut last = Error::Solver("no competitor sampled".into());
    for _ in 0..32 {
        let r = AntiHermMatrix::skewed(random_unit_matrix(n, n, rng));
        let mid = u1.mul(&half).mul(&r.scale(scale).exp());
        match two_segment_length(u1, &mid, u2, norm) {
            Ok(l) => return Ok(l),
            Err(e) => last = e,
        }
    }
    Err(last)
}

/// Random probe whose points stay within `radius` of the identity, measured
/// with `ball_norm`, on a grid of `gridsize` points. Returns `None` if no
/// admissible probe was found after shrinking the direction repeatedly.
pub fn random_probe_in_ball<R: Rng + ?Sized>(
    dim: usize,
    radius: f64,
    ball_norm: FinslerNorm,
    gridsize: usize,
    rng: &mut R,
) -> Option<GeodesicProbe> {
    for _ in 0..64 {
        let v = random_anti_herm_with_norm(dim, 1.0, rng);
        let v = v.scale(radius * crate::sampling::uniform(0.05, 0.9, rng) / ball_norm.eval(v.as_mat()));
        let mut z = random_anti_herm_with_norm(dim, 1.0, rng);
        z = z.scale(radius * crate::sampling::uniform(0.2, 1.6, rng) / ball_norm.eval(z.as_mat()));
        for _ in 0..12 {
            let probe = GeodesicProbe { v: v.clone(), z: z.clone() };
            let inside = uniform_grid(gridsize)
                .into_iter()
                .all(|s| matches!(log_norm(&probe.point(s), ball_norm), Ok(d) if d < radius));
            if inside {
                return Some(probe);
            }
            z = z.scale(0.5);
        }
    }
    None
}
