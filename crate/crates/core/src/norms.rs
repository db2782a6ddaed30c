//! Finsler norms on the Lie algebra and the Hessian form of the Schatten norms.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{ensure_same_dim, frobenius, trace_product, AntiHermMatrix, CMat};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormKind {
    Operator,
    SchattenP,
    /// Schatten norm for the trace `Tr/dim`.
    NormalizedSchattenP,
}

/// A norm used as the Finsler metric of the unitary group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FinslerNorm {
    pub kind: NormKind,
    /// Schatten exponent; ignored for the operator norm.
    pub p: u32,
}

impl FinslerNorm {
    pub fn operator() -> Self {
        FinslerNorm { kind: NormKind::Operator, p: 0 }
    }

    pub fn schatten(p: u32) -> Result<Self> {
        check_even(p, 2)?;
        Ok(FinslerNorm { kind: NormKind::SchattenP, p })
    }

    pub fn normalized(p: u32) -> Result<Self> {
        check_even(p, 2)?;
        Ok(FinslerNorm { kind: NormKind::NormalizedSchattenP, p })
    }

    /// 1 for the standard trace, `1/dim` for the normalized one.
    pub fn trace_factor(&self, dim: usize) -> f64 {
        match self.kind {
            NormKind::NormalizedSchattenP => 1.0 / dim as f64,
            _ => 1.0,
        }
    }

    pub fn eval(&self, x: &CMat) -> f64 {
        match self.kind {
            NormKind::Operator => operator_norm(x),
            _ => schatten_from_singular_values(&singular_values(x), self.p, self.trace_factor(x.nrows())),
        }
    }

    pub fn label(&self) -> String {
        match self.kind {
            NormKind::Operator => "operator".to_string(),
            NormKind::SchattenP => format!("schatten{}", self.p),
            NormKind::NormalizedSchattenP => format!("normalized{}", self.p),
        }
    }
}

pub(crate) fn check_even(p: u32, min: u32) -> Result<()> {
    if p < min || p % 2 != 0 {
        return Err(Error::InvalidExponent(p, min));
    }
    Ok(())
}

pub fn singular_values(x: &CMat) -> Vec<f64> {
    x.clone().svd(false, false).singular_values.iter().copied().collect()
}

/// Largest singular value.
pub fn operator_norm(x: &CMat) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    singular_values(x).into_iter().fold(0.0, f64::max)
}

fn schatten_from_singular_values(sigma: &[f64], p: u32, factor: f64) -> f64 {
    let top = sigma.iter().copied().fold(0.0, f64::max);
    if top == 0.0 {
        return 0.0;
    }
    // scaled by the largest singular value so large p does not overflow
    let sum: f64 = sigma.iter().map(|s| (s / top).powi(p as i32)).sum();
    top * (sum * factor).powf(1.0 / p as f64)
}

/// `(Σ σ_i^p · factor)^{1/p}`; the norm must be a Schatten kind.
pub fn schatten_norm(x: &CMat, norm: FinslerNorm) -> Result<f64> {
    if norm.kind == NormKind::Operator {
        return Err(Error::InvalidExponent(norm.p, 2));
    }
    check_even(norm.p, 2)?;
    Ok(norm.eval(x))
}

fn powers(a: &CMat, max: usize) -> Vec<CMat> {
    let n = a.nrows();
    let mut out = Vec::with_capacity(max + 1);
    out.push(CMat::identity(n, n));
    for k in 1..=max {
        let next = &out[k - 1] * a;
        out.push(next);
    }
    out
}

fn sign(p: u32) -> f64 {
    if (p / 2) % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `H_a(b, c) = (−1)^{p/2} p Σ_{k=0}^{p−2} Tr(a^{p−2−k} b a^k c)`.
///
/// This is the second derivative of `x ↦ (−1)^{p/2} Tr(x^p) = ‖x‖_p^p` at `a`
/// in the directions `b`, `c`.
pub fn hessian_form(a: &AntiHermMatrix, b: &AntiHermMatrix, c: &AntiHermMatrix, p: u32) -> Result<f64> {
    check_even(p, 4)?;
    ensure_same_dim(a.dim(), b.dim())?;
    ensure_same_dim(a.dim(), c.dim())?;
    let pw = powers(a.as_mat(), p as usize - 2);
    let m = p as usize - 2;
    let mut acc = crate::linalg::C64::new(0.0, 0.0);
    for k in 0..=m {
        let left = &pw[m - k] * b.as_mat() * &pw[k];
        acc += trace_product(&left, c.as_mat());
    }
    let value = acc * (sign(p) * p as f64);
    let scale = (p as f64 * (m + 1) as f64)
        * frobenius(a.as_mat()).powi(m as i32)
        * frobenius(b.as_mat())
        * frobenius(c.as_mat());
    let tolerance = 1e-8 * scale.max(1.0);
    if value.im.abs() > tolerance {
        return Err(Error::ImaginaryResidue { residue: value.im.abs(), tolerance });
    }
    Ok(value.re)
}

/// `Q_a(b) = H_a(b, b)`.
pub fn quadratic_form(a: &AntiHermMatrix, b: &AntiHermMatrix, p: u32) -> Result<f64> {
    hessian_form(a, b, b, p)
}

/// Sum-of-squares expression for `Q_a(b)`:
/// `p‖b a^{p/2−1}‖₂² + (p/2) Σ_{l+m=p/2−2} ‖a^l(ab+ba)a^m‖₂²`.
pub fn quadratic_form_sum_of_squares(a: &AntiHermMatrix, b: &AntiHermMatrix, p: u32) -> Result<f64> {
    check_even(p, 4)?;
    ensure_same_dim(a.dim(), b.dim())?;
    let half = p as usize / 2;
    let pw = powers(a.as_mat(), half - 1);
    let first = frobenius(&(b.as_mat() * &pw[half - 1])).powi(2);
    let anti = a.as_mat() * b.as_mat() + b.as_mat() * a.as_mat();
    let top = half - 2;
    let second: f64 = (0..=top)
        .map(|l| frobenius(&(&pw[l] * &anti * &pw[top - l])).powi(2))
        .sum();
    Ok(p as f64 * first + half as f64 * second)
}

/// Both Hessian properties evaluated at one `(a, b)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HessianReport {
    /// `H_a(b, [b, a])`
    pub h_value: f64,
    pub q_b: f64,
    /// `Q_a([b, a])`
    pub property1_lhs: f64,
    /// `4‖a‖² Q_a(b)`
    pub property1_rhs: f64,
    pub property2_lhs: f64,
    pub property2_rhs: f64,
}

impl HessianReport {
    pub fn property1_slack(&self) -> f64 {
        self.property1_rhs - self.property1_lhs
    }

    pub fn property2_gap(&self) -> f64 {
        (self.property2_lhs - self.property2_rhs).abs()
    }

    pub fn holds(&self) -> bool {
        let scale = self.property2_lhs.abs().max(self.property2_rhs.abs()).max(1.0);
        self.property1_lhs <= self.property1_rhs + 1e-9 && self.property2_gap() <= 1e-9 * scale
    }
}

pub fn check_hessian_properties(a: &AntiHermMatrix, b: &AntiHermMatrix, p: u32) -> Result<HessianReport> {
    let comm = AntiHermMatrix::skewed(crate::linalg::commutator(b.as_mat(), a.as_mat()));
    let q_b = quadratic_form(a, b, p)?;
    let property1_lhs = quadratic_form(a, &comm, p)?;
    let norm_a = operator_norm(a.as_mat());
    Ok(HessianReport {
        h_value: hessian_form(a, b, &comm, p)?,
        q_b,
        property1_lhs,
        property1_rhs: 4.0 * norm_a * norm_a * q_b,
        property2_lhs: q_b,
        property2_rhs: quadratic_form_sum_of_squares(a, b, p)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{HermMatrix, C64};

    #[test]
    fn operator_norm_basics() {
        assert_eq!(operator_norm(&CMat::zeros(3, 3)), 0.0);
        let mut d = CMat::zeros(2, 2);
        d[(0, 0)] = C64::new(3.0, 0.0);
        d[(1, 1)] = C64::new(0.0, -4.0);
        assert!((operator_norm(&d) - 4.0).abs() < 1e-14);
    }

    #[test]
    fn schatten_examples() {
        let d = HermMatrix::from_real_diagonal(&[3.0, 4.0]);
        assert!((schatten_norm(d.as_mat(), FinslerNorm::schatten(2).unwrap()).unwrap() - 5.0).abs() < 1e-14);
        for p in [2, 4, 10] {
            let id = HermMatrix::identity(5);
            let v = schatten_norm(id.as_mat(), FinslerNorm::normalized(p).unwrap()).unwrap();
            assert!((v - 1.0).abs() < 1e-14);
        }
        let d = HermMatrix::from_real_diagonal(&[1.0, 0.5]);
        let expected = (1.0 + 2f64.powi(-10)).powf(0.1);
        let got = schatten_norm(d.as_mat(), FinslerNorm::schatten(10).unwrap()).unwrap();
        assert!((got - expected).abs() < 1e-15);
    }

    #[test]
    fn exponent_validation() {
        assert_eq!(FinslerNorm::schatten(3), Err(Error::InvalidExponent(3, 2)));
        assert_eq!(FinslerNorm::schatten(0), Err(Error::InvalidExponent(0, 2)));
        assert!(schatten_norm(&CMat::zeros(2, 2), FinslerNorm::operator()).is_err());
        let z = AntiHermMatrix::zeros(2);
        assert_eq!(hessian_form(&z, &z, &z, 2), Err(Error::InvalidExponent(2, 4)));
    }

    #[test]
    fn hessian_vanishes_at_zero_base_point() {
        let a = AntiHermMatrix::zeros(3);
        let b = AntiHermMatrix::from_imag_diagonal(&[1.0, -0.5, 2.0]);
        for p in [4, 6, 8] {
            assert_eq!(hessian_form(&a, &b, &b, p).unwrap(), 0.0);
        }
    }

    #[test]
    fn quadratic_form_of_zero_direction() {
        let a = AntiHermMatrix::from_imag_diagonal(&[1.0, -0.5, 2.0]);
        assert_eq!(quadratic_form(&a, &AntiHermMatrix::zeros(3), 4).unwrap(), 0.0);
    }

    #[test]
    fn commuting_pair_has_zero_property1_lhs() {
        let a = AntiHermMatrix::from_imag_diagonal(&[1.0, -0.5, 2.0]);
        let b = AntiHermMatrix::from_imag_diagonal(&[0.3, 0.7, -1.0]);
        let r = check_hessian_properties(&a, &b, 4).unwrap();
        assert_eq!(r.property1_lhs, 0.0);
        assert!(r.property1_lhs <= r.property1_rhs);
        assert!(r.holds());
    }
}
