//! Dense complex matrix kernel.
//!
//! Symmetry-typed wrappers around `DMatrix<Complex64>` plus the handful of
//! matrix functions the geometry needs: exponential, principal logarithm of a
//! unitary, polar decomposition, Hermitian functional calculus and the
//! closed form of the differential of the exponential map.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;

pub(crate) const I: C64 = C64::new(0.0, 1.0);

/// Tolerance for Hermitian / anti-Hermitian constructors at dimension `dim`.
pub fn symtol(dim: usize) -> f64 {
    1e-12 * dim as f64
}

/// Tolerance for `u*u = 1` at dimension `dim`.
pub fn unitary_tol(dim: usize) -> f64 {
    1e-10 * dim as f64
}

pub fn frobenius(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn is_finite(m: &CMat) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

fn ensure_square(m: &CMat) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare { rows: m.nrows(), cols: m.ncols() });
    }
    Ok(m.nrows())
}

pub(crate) fn ensure_same_dim(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::DimensionMismatch { expected: a, got: b });
    }
    Ok(())
}

/// `ab - ba`
pub fn commutator(a: &CMat, b: &CMat) -> CMat {
    a * b - b * a
}

/// `Tr(ab)` without forming the product.
pub fn trace_product(a: &CMat, b: &CMat) -> C64 {
    let n = a.nrows();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..n {
        for k in 0..a.ncols() {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn real_scale(m: &CMat, s: f64) -> CMat {
    m.map(|z| z * s)
}

fn diag_conjugate(v: &CMat, d: &[C64]) -> CMat {
    // v diag(d) v*
    let mut vd = v.clone();
    for (j, &dj) in d.iter().enumerate() {
        for i in 0..v.nrows() {
            vd[(i, j)] *= dj;
        }
    }
    &vd * v.adjoint()
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
pub(crate) fn hermitian_eigen(m: &CMat) -> (Vec<f64>, CMat) {
    if m.is_empty() {
        return (Vec::new(), CMat::zeros(m.nrows(), m.ncols()));
    }
    let eig = m.clone().symmetric_eigen();
    let n = m.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = CMat::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    (values, vectors)
}

/// Hermitian matrix, `M = M*` up to re-symmetrization.
#[derive(Debug, Clone, PartialEq)]
pub struct HermMatrix(CMat);

impl HermMatrix {
    /// Checks `‖M − M*‖_F ≤ symtol·max(1, ‖M‖_F)` and re-symmetrizes.
    pub fn new(m: CMat) -> Result<Self> {
        let n = ensure_square(&m)?;
        if !is_finite(&m) {
            return Err(Error::NonFinite);
        }
        let residual = frobenius(&(&m - m.adjoint()));
        let tolerance = symtol(n) * frobenius(&m).max(1.0);
        if residual > tolerance {
            return Err(Error::SymmetryViolation { residual, tolerance });
        }
        Ok(Self::symmetrized(m))
    }

    /// `(M + M*)/2`, no check.
    pub fn symmetrized(m: CMat) -> Self {
        let adj = m.adjoint();
        HermMatrix((m + adj) * C64::new(0.5, 0.0))
    }

    pub fn zeros(n: usize) -> Self {
        HermMatrix(CMat::zeros(n, n))
    }

    pub fn identity(n: usize) -> Self {
        HermMatrix(identity(n))
    }

    pub fn from_real_diagonal(d: &[f64]) -> Self {
        let n = d.len();
        HermMatrix(CMat::from_fn(n, n, |i, j| if i == j { C64::new(d[i], 0.0) } else { C64::new(0.0, 0.0) }))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_mat(&self) -> &CMat {
        &self.0
    }

    pub fn into_inner(self) -> CMat {
        self.0
    }

    /// Eigenvalues (ascending) and an orthonormal eigenbasis.
    pub fn eigh(&self) -> (Vec<f64>, CMat) {
        hermitian_eigen(&self.0)
    }

    /// `i·M`, which is anti-Hermitian.
    pub fn times_i(&self) -> AntiHermMatrix {
        AntiHermMatrix::skewed(self.0.map(|z| z * I))
    }
}

/// Anti-Hermitian matrix, `M* = −M`; the Lie algebra of the unitary group.
#[derive(Debug, Clone, PartialEq)]
pub struct AntiHermMatrix(CMat);

impl AntiHermMatrix {
    /// Checks `‖M + M*‖_F ≤ symtol·max(1, ‖M‖_F)` and re-symmetrizes.
    pub fn new(m: CMat) -> Result<Self> {
        let n = ensure_square(&m)?;
        if !is_finite(&m) {
            return Err(Error::NonFinite);
        }
        let residual = frobenius(&(&m + m.adjoint()));
        let tolerance = symtol(n) * frobenius(&m).max(1.0);
        if residual > tolerance {
            return Err(Error::SymmetryViolation { residual, tolerance });
        }
        Ok(Self::skewed(m))
    }

    /// `(M − M*)/2`, no check.
    pub fn skewed(m: CMat) -> Self {
        let adj = m.adjoint();
        AntiHermMatrix((m - adj) * C64::new(0.5, 0.0))
    }

    pub fn zeros(n: usize) -> Self {
        AntiHermMatrix(CMat::zeros(n, n))
    }

    /// `i·diag(d)`
    pub fn from_imag_diagonal(d: &[f64]) -> Self {
        AntiHermMatrix(HermMatrix::from_real_diagonal(d).0.map(|z| z * I))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_mat(&self) -> &CMat {
        &self.0
    }

    pub fn into_inner(self) -> CMat {
        self.0
    }

    /// `−i·M`, Hermitian with the same eigenvectors.
    pub fn to_hermitian(&self) -> HermMatrix {
        HermMatrix::symmetrized(self.0.map(|z| z * -I))
    }

    /// `M = V diag(iθ) V*` with θ ascending.
    pub fn eig(&self) -> (Vec<f64>, CMat) {
        hermitian_eigen(&self.to_hermitian().0)
    }

    pub fn scale(&self, s: f64) -> Self {
        AntiHermMatrix(real_scale(&self.0, s))
    }

    pub fn add(&self, other: &Self) -> Self {
        AntiHermMatrix(&self.0 + &other.0)
    }

    pub fn sub(&self, other: &Self) -> Self {
        AntiHermMatrix(&self.0 - &other.0)
    }

    /// `e^M`, through the eigendecomposition of `−iM`.
    pub fn exp(&self) -> UnitaryMatrix {
        let (theta, v) = self.eig();
        let d: Vec<C64> = theta.iter().map(|&t| C64::from_polar(1.0, t)).collect();
        UnitaryMatrix(diag_conjugate(&v, &d))
    }

    /// `u M u*`
    pub fn conjugate_by(&self, u: &UnitaryMatrix) -> Self {
        AntiHermMatrix::skewed(&u.0 * &self.0 * u.0.adjoint())
    }
}

/// Unitary matrix, `u*u = 1` to `1e-10·dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryMatrix(CMat);

impl UnitaryMatrix {
    pub fn new(m: CMat) -> Result<Self> {
        let n = ensure_square(&m)?;
        if !is_finite(&m) {
            return Err(Error::NonFinite);
        }
        let residual = frobenius(&(m.adjoint() * &m - identity(n)));
        if residual > unitary_tol(n) {
            return Err(Error::NotUnitary(residual));
        }
        Ok(UnitaryMatrix(m))
    }

    pub(crate) fn new_unchecked(m: CMat) -> Self {
        UnitaryMatrix(m)
    }

    pub fn identity(n: usize) -> Self {
        UnitaryMatrix(identity(n))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_mat(&self) -> &CMat {
        &self.0
    }

    pub fn into_inner(self) -> CMat {
        self.0
    }

    pub fn adjoint(&self) -> Self {
        UnitaryMatrix(self.0.adjoint())
    }

    pub fn mul(&self, other: &Self) -> Self {
        UnitaryMatrix(&self.0 * &other.0)
    }

    /// `u a u*`
    pub fn conjugate(&self, a: &CMat) -> CMat {
        &self.0 * a * self.0.adjoint()
    }

    /// `‖u*u − 1‖_F`
    pub fn unitarity_residual(&self) -> f64 {
        frobenius(&(self.0.adjoint() * &self.0 - identity(self.dim())))
    }
}

/// Matrix exponential.
///
/// Normal inputs go through a unitary diagonalization (Hermitian eigensolver
/// for (anti-)Hermitian input, Schur form otherwise); non-normal inputs use
/// Padé scaling and squaring.
pub fn mat_exp(x: &CMat) -> Result<CMat> {
    let n = ensure_square(x)?;
    if !is_finite(x) {
        return Err(Error::NonFinite);
    }
    let scale = frobenius(x).max(1.0);
    let tol = symtol(n) * scale;
    if frobenius(&(x + x.adjoint())) <= tol {
        return Ok(AntiHermMatrix::skewed(x.clone()).exp().0);
    }
    if frobenius(&(x - x.adjoint())) <= tol {
        let (lambda, v) = hermitian_eigen(&HermMatrix::symmetrized(x.clone()).0);
        let d: Vec<C64> = lambda.iter().map(|&l| C64::new(l.exp(), 0.0)).collect();
        return Ok(diag_conjugate(&v, &d));
    }
    let normality = frobenius(&(x * x.adjoint() - x.adjoint() * x));
    if normality <= symtol(n) * scale * scale {
        let (q, t) = x.clone().schur().unpack();
        let d: Vec<C64> = (0..n).map(|j| t[(j, j)].exp()).collect();
        return Ok(diag_conjugate(&q, &d));
    }
    Ok(x.exp())
}

/// Eigen-angles of a unitary, `u = Q diag(e^{iθ}) Q*` with θ in (−π, π].
pub fn unitary_angles(u: &UnitaryMatrix) -> (Vec<f64>, CMat, f64) {
    let n = u.dim();
    let (q, t) = u.0.clone().schur().unpack();
    let mut min_dist = f64::INFINITY;
    let theta = (0..n)
        .map(|j| {
            let lambda = t[(j, j)];
            min_dist = min_dist.min((lambda + 1.0).norm());
            lambda.arg()
        })
        .collect();
    (theta, q, min_dist)
}

/// Principal logarithm of a unitary: anti-Hermitian, eigen-angles in (−π, π).
///
/// Fails with [`Error::EigenvalueAtMinusOne`] when some eigenvalue lies within
/// `1e-10` of −1, where the principal branch is undefined.
pub fn principal_log_unitary(u: &UnitaryMatrix) -> Result<AntiHermMatrix> {
    let (theta, q, min_dist) = unitary_angles(u);
    if min_dist < 1e-10 {
        return Err(Error::EigenvalueAtMinusOne(min_dist));
    }
    let d: Vec<C64> = theta.iter().map(|&t| C64::new(0.0, t)).collect();
    Ok(AntiHermMatrix::skewed(diag_conjugate(&q, &d)))
}

/// `φ(d) = (1 − e^{−id})/(id)`, with `φ(0) = 1`.
pub fn phi(d: f64) -> C64 {
    if d.abs() < 1e-6 {
        // 1 − id/2 − d²/6 + id³/24
        let d2 = d * d;
        C64::new(1.0 - d2 / 6.0, -d / 2.0 + d2 * d / 24.0)
    } else {
        (C64::new(1.0, 0.0) - C64::from_polar(1.0, -d)) / C64::new(0.0, d)
    }
}

fn transport_in_eigenbasis(w: &AntiHermMatrix, m: &AntiHermMatrix, invert: bool) -> Result<AntiHermMatrix> {
    ensure_same_dim(w.dim(), m.dim())?;
    let (theta, v) = w.eig();
    let mut hat = v.adjoint() * &m.0 * &v;
    let n = w.dim();
    for j in 0..n {
        for k in 0..n {
            let f = phi(theta[j] - theta[k]);
            if invert {
                if f.norm() < 1e-12 {
                    return Err(Error::SingularTransport(f.norm()));
                }
                hat[(j, k)] /= f;
            } else {
                hat[(j, k)] *= f;
            }
        }
    }
    Ok(AntiHermMatrix::skewed(&v * hat * v.adjoint()))
}

/// `∫₀¹ e^{−tw} ẇ e^{tw} dt`, evaluated in an eigenbasis of `w`.
pub fn dexp_transport(w: &AntiHermMatrix, wdot: &AntiHermMatrix) -> Result<AntiHermMatrix> {
    transport_in_eigenbasis(w, wdot, false)
}

/// Solves `dexp_transport(w, ẇ) = z` for `ẇ`.
pub fn dexp_inverse(w: &AntiHermMatrix, z: &AntiHermMatrix) -> Result<AntiHermMatrix> {
    transport_in_eigenbasis(w, z, true)
}

/// Unitary part `g(g*g)^{−1/2}` of the polar decomposition.
pub fn polar_unitary_part(g: &CMat) -> Result<UnitaryMatrix> {
    ensure_square(g)?;
    if !is_finite(g) {
        return Err(Error::NonFinite);
    }
    let svd = g.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if smax == 0.0 || smin <= 1e-12 * smax {
        return Err(Error::Singular(smin));
    }
    let u = svd.u.expect("left singular vectors requested");
    let v_t = svd.v_t.expect("right singular vectors requested");
    Ok(UnitaryMatrix(u * v_t))
}

/// `f(a)` for Hermitian `a`, applied to eigenvalues.
pub fn functional_calculus<F: Fn(f64) -> f64>(a: &HermMatrix, f: F) -> Result<HermMatrix> {
    let (lambda, v) = a.eigh();
    let mut d = Vec::with_capacity(lambda.len());
    for &l in &lambda {
        let y = f(l);
        if !y.is_finite() {
            return Err(Error::FunctionUndefined(l));
        }
        d.push(C64::new(y, 0.0));
    }
    Ok(HermMatrix::symmetrized(diag_conjugate(&v, &d)))
}
