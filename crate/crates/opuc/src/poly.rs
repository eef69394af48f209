//! Dense complex polynomials in the monomial basis.

use crate::error::{OpucError, Result};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::ops::{Add, Mul, Neg, Sub};

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// Polynomial `a_0 + a_1 z + ... + a_n z^n`.
///
/// The stored length fixes the nominal degree; a zero trailing coefficient
/// is kept rather than trimmed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexPoly {
    coeffs: Vec<C64>,
}

impl ComplexPoly {
    pub fn new(coeffs: Vec<C64>) -> Self {
        if coeffs.is_empty() {
            return Self::zero();
        }
        Self { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn zero() -> Self {
        Self { coeffs: vec![ZERO] }
    }

    pub fn constant(c: C64) -> Self {
        Self { coeffs: vec![c] }
    }

    /// `c z^n`
    pub fn monomial(n: usize, c: C64) -> Self {
        let mut coeffs = vec![ZERO; n + 1];
        coeffs[n] = c;
        Self { coeffs }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<C64> {
        self.coeffs
    }

    pub fn coeff(&self, k: usize) -> C64 {
        self.coeffs.get(k).copied().unwrap_or(ZERO)
    }

    pub fn leading(&self) -> C64 {
        self.coeffs[self.degree()]
    }

    pub fn eval(&self, z: C64) -> C64 {
        self.coeffs.iter().rev().fold(ZERO, |acc, &a| acc * z + a)
    }

    /// Value, first and second derivative in one Horner sweep.
    pub fn eval_d2(&self, z: C64) -> (C64, C64, C64) {
        let mut p = ZERO;
        let mut d1 = ZERO;
        let mut d2 = ZERO;
        for &a in self.coeffs.iter().rev() {
            d2 = d2 * z + d1;
            d1 = d1 * z + p;
            p = p * z + a;
        }
        (p, d1, d2 * 2.0)
    }

    /// `f*(z) = sum conj(a_k) z^{n-k}`.
    pub fn reciprocal(&self) -> Result<Self> {
        if self.leading() == ZERO {
            return Err(OpucError::ZeroLeadingCoefficient);
        }
        Ok(self.reciprocal_nominal())
    }

    /// Reciprocal with respect to the nominal degree, without the leading-coefficient check.
    pub fn reciprocal_nominal(&self) -> Self {
        Self {
            coeffs: self.coeffs.iter().rev().map(|a| a.conj()).collect(),
        }
    }

    pub fn derivative(&self) -> Self {
        if self.degree() == 0 {
            return Self::zero();
        }
        Self {
            coeffs: (1..self.coeffs.len())
                .map(|k| self.coeffs[k] * k as f64)
                .collect(),
        }
    }

    /// `D_q p(z) = (p(z) - p(qz)) / ((1-q) z)`.
    pub fn q_difference(&self, q: QReal) -> Self {
        if self.degree() == 0 {
            return Self::zero();
        }
        Self {
            coeffs: (1..self.coeffs.len())
                .map(|k| self.coeffs[k] * q_number(q.q, k))
                .collect(),
        }
    }

    /// `p(s z)`
    pub fn dilate(&self, s: C64) -> Self {
        let mut pw = ONE;
        let coeffs = self
            .coeffs
            .iter()
            .map(|&a| {
                let v = a * pw;
                pw *= s;
                v
            })
            .collect();
        Self { coeffs }
    }

    /// `z^k p(z)`
    pub fn shift(&self, k: usize) -> Self {
        let mut coeffs = vec![ZERO; k];
        coeffs.extend_from_slice(&self.coeffs);
        Self { coeffs }
    }

    pub fn scale(&self, c: C64) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|&a| a * c).collect(),
        }
    }

    pub fn scale_real(&self, c: f64) -> Self {
        self.scale(C64::new(c, 0.0))
    }

    /// Pad with zero coefficients up to nominal degree `n`.
    pub fn padded(&self, n: usize) -> Self {
        let mut coeffs = self.coeffs.clone();
        if coeffs.len() < n + 1 {
            coeffs.resize(n + 1, ZERO);
        }
        Self { coeffs }
    }

    /// Drop exactly-zero trailing coefficients.
    pub fn trimmed(&self) -> Self {
        let mut coeffs = self.coeffs.clone();
        while coeffs.len() > 1 && *coeffs.last().unwrap() == ZERO {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|a| a.norm()).fold(0.0, f64::max)
    }

    /// Largest coefficient difference, relative to the larger of the two coefficient scales.
    pub fn rel_diff(&self, other: &Self) -> f64 {
        let n = self.coeffs.len().max(other.coeffs.len());
        let scale = self.max_abs().max(other.max_abs());
        let d = (0..n)
            .map(|k| (self.coeff(k) - other.coeff(k)).norm())
            .fold(0.0, f64::max);
        if scale == 0.0 {
            d
        } else {
            d / scale
        }
    }

    /// `sum |a_k| |z|^k`, the natural scale of an evaluation at `z`.
    pub fn abs_eval(&self, z: C64) -> f64 {
        let r = z.norm();
        self.coeffs.iter().rev().fold(0.0, |acc, a| acc * r + a.norm())
    }
}

impl Add for &ComplexPoly {
    type Output = ComplexPoly;
    fn add(self, rhs: &ComplexPoly) -> ComplexPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        ComplexPoly::new((0..n).map(|k| self.coeff(k) + rhs.coeff(k)).collect())
    }
}

impl Sub for &ComplexPoly {
    type Output = ComplexPoly;
    fn sub(self, rhs: &ComplexPoly) -> ComplexPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        ComplexPoly::new((0..n).map(|k| self.coeff(k) - rhs.coeff(k)).collect())
    }
}

impl Neg for &ComplexPoly {
    type Output = ComplexPoly;
    fn neg(self) -> ComplexPoly {
        self.scale_real(-1.0)
    }
}

impl Mul for &ComplexPoly {
    type Output = ComplexPoly;
    fn mul(self, rhs: &ComplexPoly) -> ComplexPoly {
        let mut c = vec![ZERO; self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in rhs.coeffs.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        ComplexPoly::new(c)
    }
}

/// Base `q` with its principal square root, `0 < q < 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QReal {
    pub q: f64,
    pub sqrt_q: f64,
}

impl QReal {
    pub fn new(q: f64) -> Result<Self> {
        if !(q > 0.0 && q < 1.0) {
            return Err(OpucError::Domain(format!("q = {q} must lie in (0, 1)")));
        }
        Ok(Self { q, sqrt_q: q.sqrt() })
    }
}

/// `[k]_q = (1 - q^k) / (1 - q) = 1 + q + ... + q^{k-1}`
pub fn q_number(q: f64, k: usize) -> f64 {
    let mut s = 0.0;
    let mut p = 1.0;
    for _ in 0..k {
        s += p;
        p *= q;
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn eval_examples() {
        assert_eq!(ComplexPoly::constant(ONE).eval(c(7.0, 2.0)), ONE);
        let z2 = ComplexPoly::monomial(2, ONE);
        assert!((z2.eval(c(0.0, 1.0)) - c(-1.0, 0.0)).norm() < 1e-15);
        let p = ComplexPoly::from_real(&[1.0, 2.0]);
        assert_eq!(p.eval(c(-0.5, 0.0)), ZERO);
    }

    #[test]
    fn reciprocal_examples() {
        let f = ComplexPoly::new(vec![c(0.0, 1.0), c(2.0, 0.0)]);
        let fs = f.reciprocal().unwrap();
        assert_eq!(fs.coeffs(), &[c(2.0, 0.0), c(0.0, -1.0)]);
        let zn = ComplexPoly::monomial(4, ONE);
        assert_eq!(zn.reciprocal().unwrap().trimmed(), ComplexPoly::constant(ONE));
        let bad = ComplexPoly::new(vec![ONE, ZERO]);
        assert_eq!(bad.reciprocal(), Err(OpucError::ZeroLeadingCoefficient));
    }

    #[test]
    fn derivative_examples() {
        let z2 = ComplexPoly::monomial(2, ONE);
        assert_eq!(z2.derivative(), ComplexPoly::new(vec![ZERO, c(2.0, 0.0)]));
        assert_eq!(ComplexPoly::constant(c(3.0, 1.0)).derivative(), ComplexPoly::zero());
        assert_eq!(
            ComplexPoly::from_real(&[1.0, 2.0]).derivative(),
            ComplexPoly::from_real(&[2.0])
        );
    }

    #[test]
    fn q_difference_examples() {
        let q = QReal::new(0.3).unwrap();
        let d = ComplexPoly::monomial(2, ONE).q_difference(q);
        assert!((d.coeff(1) - c(1.3, 0.0)).norm() < 1e-15);
        assert_eq!(d.coeff(0), ZERO);
        assert_eq!(ComplexPoly::constant(ONE).q_difference(q), ComplexPoly::zero());
        let q1 = QReal::new(1.0 - 1e-8).unwrap();
        let z3 = ComplexPoly::monomial(3, ONE);
        assert!(z3.q_difference(q1).rel_diff(&z3.derivative()) < 1e-7);
    }

    #[test]
    fn q_difference_matches_definition() {
        let q = QReal::new(0.45).unwrap();
        let p = ComplexPoly::new(vec![c(1.0, 2.0), c(-0.5, 0.1), c(0.3, 0.0), c(2.0, -1.0)]);
        let z = c(0.3, 0.7);
        let direct = (p.eval(z) - p.eval(z * q.q)) / (z * (1.0 - q.q));
        assert!((p.q_difference(q).eval(z) - direct).norm() < 1e-14);
    }

    #[test]
    fn qreal_domain() {
        assert!(QReal::new(0.0).is_err());
        assert!(QReal::new(1.0).is_err());
        let q = QReal::new(0.7).unwrap();
        assert!((q.sqrt_q * q.sqrt_q - q.q).abs() < 1e-15);
    }

    #[test]
    fn eval_d2_matches_derivatives() {
        let p = ComplexPoly::new(vec![c(1.0, 2.0), c(-0.5, 0.1), c(0.3, 0.0), c(2.0, -1.0), c(0.2, 0.2)]);
        let z = c(-0.4, 0.9);
        let (v, d1, d2) = p.eval_d2(z);
        assert!((v - p.eval(z)).norm() < 1e-14);
        assert!((d1 - p.derivative().eval(z)).norm() < 1e-14);
        assert!((d2 - p.derivative().derivative().eval(z)).norm() < 1e-13);
    }

    fn arb_poly() -> impl Strategy<Value = ComplexPoly> {
        prop::collection::vec((-2.0..2.0f64, -2.0..2.0f64), 2..12).prop_map(|v| {
            let mut cs: Vec<C64> = v.into_iter().map(|(a, b)| C64::new(a, b)).collect();
            let n = cs.len() - 1;
            if cs[n].norm() < 1e-3 {
                cs[n] = ONE;
            }
            ComplexPoly::new(cs)
        })
    }

    proptest! {
        #[test]
        fn horner_matches_power_sum(p in arb_poly(), r in 0.0..2.0f64, th in 0.0..6.3f64) {
            let z = C64::from_polar(r, th);
            let naive: C64 = p.coeffs().iter().enumerate().map(|(k, &a)| a * z.powu(k as u32)).sum();
            let scale = p.abs_eval(z).max(1e-300);
            prop_assert!((p.eval(z) - naive).norm() / scale < 1e-14);
        }

        #[test]
        fn reciprocal_unimodular_modulus(p in arb_poly()) {
            let ps = p.reciprocal().unwrap();
            prop_assert_eq!(ps.degree(), p.degree());
            for k in 0..64 {
                let z = C64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / 64.0);
                let (a, b) = (p.eval(z).norm(), ps.eval(z).norm());
                prop_assert!((a - b).abs() <= 1e-12 * p.abs_eval(z));
            }
        }

        #[test]
        fn reciprocal_involution(p in arb_poly()) {
            let mut cs = p.coeffs().to_vec();
            cs[0] = C64::new(cs[0].re + 3.0, 0.0);
            let p = ComplexPoly::new(cs);
            let back = p.reciprocal().unwrap().reciprocal().unwrap();
            prop_assert!(back.rel_diff(&p) == 0.0);
        }

        #[test]
        fn q_difference_degree_and_leading(p in arb_poly(), q in 0.05..0.95f64) {
            let qr = QReal::new(q).unwrap();
            let d = p.q_difference(qr);
            let n = p.degree();
            prop_assert_eq!(d.degree(), n - 1);
            let expect = p.leading() * (1.0 - q.powi(n as i32)) / (1.0 - q);
            prop_assert!((d.leading() - expect).norm() <= 1e-14 * expect.norm());
        }
    }
}
