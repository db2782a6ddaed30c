//! Minimal geodesics between two orthogonal projections.
//!
//! Two projections `p₀`, `p₁` split the space into the four intersections
//! `H₀₀ = ker p₀ ∩ ker p₁`, `H₀₁ = ker p₀ ∩ R(p₁)`, `H₁₀ = R(p₀) ∩ ker p₁`,
//! `H₁₁ = R(p₀) ∩ R(p₁)` and a generic part on which the pair is in Halmos
//! position: there `p₁` is the projection onto `cos(x)e + sin(x)f` for an
//! angle operator `x` with spectrum in `(0, π/2)`.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{ensure_same_dim, frobenius, principal_log_unitary, AntiHermMatrix, CMat, HermMatrix, C64};
use crate::norms::operator_norm;

/// Eigenvalue clustering tolerance for the intersections.
pub const CLUSTER_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct HalmosDecomposition {
    pub h00: CMat,
    pub h01: CMat,
    pub h10: CMat,
    pub h11: CMat,
    /// `e_j ∈ R(p₀)`, generic part.
    pub generic_range: CMat,
    /// `f_j = (1 − p₀)p₁e_j / ‖·‖ ∈ ker p₀`, generic part.
    pub generic_kernel: CMat,
    /// Eigenvalues of the angle operator, ascending.
    pub angles: Vec<f64>,
    /// Some generic angle lies within `1e-6` of `π/2`.
    pub near_orthogonal: bool,
}

impl HalmosDecomposition {
    /// Angle operator `x` in the basis `e_j`.
    pub fn angle_operator(&self) -> HermMatrix {
        HermMatrix::from_real_diagonal(&self.angles)
    }

    /// `[e₁ … e_k f₁ … f_k]`, the generic part in Halmos position.
    pub fn generic_frame(&self) -> CMat {
        let n = self.generic_range.nrows();
        let k = self.angles.len();
        let mut w = CMat::zeros(n, 2 * k);
        w.view_mut((0, 0), (n, k)).copy_from(&self.generic_range);
        w.view_mut((0, k), (n, k)).copy_from(&self.generic_kernel);
        w
    }

    pub fn dims(&self) -> [usize; 5] {
        [self.h00.ncols(), self.h01.ncols(), self.h10.ncols(), self.h11.ncols(), 2 * self.angles.len()]
    }

    /// All five frames side by side.
    pub fn frame(&self) -> CMat {
        let parts = [&self.h00, &self.h01, &self.h10, &self.h11, &self.generic_range, &self.generic_kernel];
        let n = self.h00.nrows();
        let mut w = CMat::zeros(n, parts.iter().map(|p| p.ncols()).sum());
        let mut offset = 0;
        for p in parts {
            w.view_mut((0, offset), (n, p.ncols())).copy_from(p);
            offset += p.ncols();
        }
        w
    }
}

/// Checks `p = p* = p²` to `1e-10·max(1, ‖p‖_F)`.
pub fn check_projection(p: &CMat) -> Result<()> {
    if p.nrows() != p.ncols() {
        return Err(Error::NotSquare { rows: p.nrows(), cols: p.ncols() });
    }
    let residual = frobenius(&(p * p - p)).max(frobenius(&(p - p.adjoint())));
    if residual > 1e-10 * frobenius(p).max(1.0) {
        return Err(Error::NotProjection(residual));
    }
    Ok(())
}

fn eigen_cluster(m: &CMat, target: f64) -> CMat {
    let (l, v) = crate::linalg::hermitian_eigen(m);
    let cols: Vec<usize> = (0..l.len()).filter(|&k| (l[k] - target).abs() < CLUSTER_TOL).collect();
    CMat::from_fn(m.nrows(), cols.len(), |i, j| v[(i, cols[j])])
}

pub fn halmos_decompose(p0: &HermMatrix, p1: &HermMatrix) -> Result<HalmosDecomposition> {
    ensure_same_dim(p0.dim(), p1.dim())?;
    check_projection(p0.as_mat())?;
    check_projection(p1.as_mat())?;
    let n = p0.dim();
    let (a, b) = (p0.as_mat(), p1.as_mat());
    let sum = a + b;
    let diff = a - b;
    let h00 = eigen_cluster(&sum, 0.0);
    let h11 = eigen_cluster(&sum, 2.0);
    let h10 = eigen_cluster(&diff, 1.0);
    let h01 = eigen_cluster(&diff, -1.0);

    // p₀p₁p₀ on R(p₀) has eigenvalues cos²(x_j) on the generic part
    let range = eigen_cluster(a, 1.0);
    let compressed = range.adjoint() * b * &range;
    let compressed = (&compressed + compressed.adjoint()) * C64::new(0.5, 0.0);
    let (c2, v) = crate::linalg::hermitian_eigen(&compressed);
    let one_minus_p0 = CMat::identity(n, n) - a;
    let mut es = Vec::new();
    let mut fs = Vec::new();
    let mut angles = Vec::new();
    for (k, &c2k) in c2.iter().enumerate() {
        let c = c2k.clamp(0.0, 1.0).sqrt();
        let s = (1.0 - c2k).clamp(0.0, 1.0).sqrt();
        // the same vectors p₀ ± p₁ would place in H₁₁ or H₁₀
        if 1.0 - c < CLUSTER_TOL || 1.0 - s < CLUSTER_TOL {
            continue;
        }
        let e: CMat = &range * v.columns(k, 1);
        let g: CMat = &one_minus_p0 * b * &e;
        let gn = frobenius(&g);
        es.push(e);
        fs.push(g / C64::new(gn, 0.0));
        angles.push(c.clamp(0.0, 1.0).acos());
    }
    let to_frame = |cols: &[CMat]| {
        CMat::from_fn(n, cols.len(), |i, j| cols[j][(i, 0)])
    };
    let out = HalmosDecomposition {
        h00,
        h01,
        h10,
        h11,
        generic_range: to_frame(&es),
        generic_kernel: to_frame(&fs),
        near_orthogonal: angles.iter().any(|&x| FRAC_PI_2 - x < 1e-6),
        angles,
    };
    let total: usize = out.dims().iter().sum();
    if total != n {
        return Err(Error::InvalidDecomposition(format!("Halmos parts span {total} of {n} dimensions")));
    }
    Ok(out)
}

/// `z = ½ log(ε₁ε₀)`, `ε_i = 2p_i − 1`, defined when `‖p₀ − p₁‖ < 1`.
pub fn direct_rotation(p0: &HermMatrix, p1: &HermMatrix) -> Result<AntiHermMatrix> {
    ensure_same_dim(p0.dim(), p1.dim())?;
    check_projection(p0.as_mat())?;
    check_projection(p1.as_mat())?;
    if operator_norm(&(p0.as_mat() - p1.as_mat())) >= 1.0 - 1e-10 {
        return Err(Error::NormOne);
    }
    let n = p0.dim();
    let id = CMat::identity(n, n);
    let e0 = p0.as_mat() * C64::new(2.0, 0.0) - &id;
    let e1 = p1.as_mat() * C64::new(2.0, 0.0) - &id;
    let u = crate::linalg::UnitaryMatrix::new(e1 * e0)?;
    Ok(principal_log_unitary(&u)?.scale(0.5))
}

/// `z = z₀ + z₂` with `e^z p₀ e^{−z} = p₁`, `‖z‖ ≤ π/2`, `z` co-diagonal for `p₀`.
///
/// `z₀ = Σ x_j (f_j e_j* − e_j f_j*)` rotates the generic part and
/// `z₂ = (π/2) Σ (g_k h_k* − h_k g_k*)` swaps `H₁₀` onto `H₀₁` through the
/// frame-matching isometry `h_k ↦ g_k`.
pub fn assemble_minimal_z(p0: &HermMatrix, p1: &HermMatrix) -> Result<AntiHermMatrix> {
    Ok(assemble_with_decomposition(p0, p1)?.0)
}

pub fn assemble_with_decomposition(p0: &HermMatrix, p1: &HermMatrix) -> Result<(AntiHermMatrix, HalmosDecomposition)> {
    let d = halmos_decompose(p0, p1)?;
    if d.h01.ncols() != d.h10.ncols() {
        return Err(Error::ComponentMismatch { h01: d.h01.ncols(), h10: d.h10.ncols() });
    }
    let n = p0.dim();
    let mut z = CMat::zeros(n, n);
    for (j, &x) in d.angles.iter().enumerate() {
        let e = d.generic_range.column(j);
        let f = d.generic_kernel.column(j);
        z += (f * e.adjoint() - e * f.adjoint()) * C64::new(x, 0.0);
    }
    for k in 0..d.h10.ncols() {
        let g = d.h01.column(k);
        let h = d.h10.column(k);
        z += (g * h.adjoint() - h * g.adjoint()) * C64::new(FRAC_PI_2, 0.0);
    }
    Ok((AntiHermMatrix::skewed(z), d))
}

/// `pzp = (1 − p)z(1 − p) = 0` to `1e-9·‖z‖`.
pub fn verify_codiagonal(p: &HermMatrix, z: &AntiHermMatrix) -> bool {
    codiagonal_residual(p, z) <= 1e-9 * operator_norm(z.as_mat())
}

pub fn codiagonal_residual(p: &HermMatrix, z: &AntiHermMatrix) -> f64 {
    let n = p.dim();
    let q = CMat::identity(n, n) - p.as_mat();
    let a = operator_norm(&(p.as_mat() * z.as_mat() * p.as_mat()));
    let b = operator_norm(&(&q * z.as_mat() * &q));
    a.max(b)
}

/// `‖e^z p₀ e^{−z} − p₁‖`
pub fn conjugation_residual(p0: &HermMatrix, p1: &HermMatrix, z: &AntiHermMatrix) -> f64 {
    operator_norm(&(z.exp().conjugate(p0.as_mat()) - p1.as_mat()))
}

/// Summary of the geodesic joining a projection pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionReport {
    pub dims: [usize; 5],
    pub angles: Vec<f64>,
    pub distance: f64,
    pub z_norm: f64,
    pub conjugation_residual: f64,
    pub codiagonal_residual: f64,
    pub near_orthogonal: bool,
    pub direct_rotation_norm: Option<f64>,
}

pub fn projection_report(p0: &HermMatrix, p1: &HermMatrix) -> Result<ProjectionReport> {
    let (z, d) = assemble_with_decomposition(p0, p1)?;
    let direct = match direct_rotation(p0, p1) {
        Ok(zd) => Some(operator_norm(zd.as_mat())),
        Err(Error::NormOne) => None,
        Err(e) => return Err(e),
    };
    Ok(ProjectionReport {
        dims: d.dims(),
        angles: d.angles.clone(),
        distance: operator_norm(&(p0.as_mat() - p1.as_mat())),
        z_norm: operator_norm(z.as_mat()),
        conjugation_residual: conjugation_residual(p0, p1, &z),
        codiagonal_residual: codiagonal_residual(p0, &z),
        near_orthogonal: d.near_orthogonal,
        direct_rotation_norm: direct,
    })
}
