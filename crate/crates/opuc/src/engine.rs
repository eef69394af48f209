//! Orthonormal systems on the unit circle and the coefficient identities
//! that tie them together.

use crate::error::{OpucError, Result};
use crate::poly::{ComplexPoly, ONE, ZERO};
use crate::weight::WeightSpec;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Route {
    ClosedForm,
    SzegoRecurrence,
    Moments,
}

/// `phi_0 ... phi_N` with `phi_n(z) = kappa_n z^n + l_n z^{n-1} + ... + phi_n(0)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpucSystem {
    kappa: Vec<f64>,
    phi0: Vec<C64>,
    ell: Vec<C64>,
    phi: Vec<ComplexPoly>,
    phistar: Vec<ComplexPoly>,
    weight: WeightSpec,
    route: Route,
}

/// Largest coefficient of `sum terms`, relative to the largest coefficient of any single term.
pub fn coeff_residual(terms: &[ComplexPoly]) -> f64 {
    let n = terms.iter().map(|t| t.degree() + 1).max().unwrap_or(1);
    let scale = terms.iter().map(|t| t.max_abs()).fold(0.0, f64::max);
    let mut worst: f64 = 0.0;
    for k in 0..n {
        let s: C64 = terms.iter().map(|t| t.coeff(k)).sum();
        worst = worst.max(s.norm());
    }
    if scale == 0.0 {
        worst
    } else {
        worst / scale
    }
}

fn point_residual(terms: &[C64]) -> f64 {
    let scale = terms.iter().map(|t| t.norm()).fold(0.0, f64::max);
    let s: C64 = terms.iter().sum();
    if scale == 0.0 {
        s.norm()
    } else {
        s.norm() / scale
    }
}

impl OpucSystem {
    /// Wrap polynomials whose leading coefficients are the (positive) `kappa_n`.
    pub fn from_polys(phi: Vec<ComplexPoly>, weight: WeightSpec, route: Route) -> Result<Self> {
        if phi.is_empty() {
            return Err(OpucError::Domain("empty system".into()));
        }
        let mut kappa = Vec::with_capacity(phi.len());
        let mut phi0 = Vec::with_capacity(phi.len());
        let mut ell = Vec::with_capacity(phi.len());
        let mut phistar = Vec::with_capacity(phi.len());
        for (n, p) in phi.iter().enumerate() {
            if p.degree() != n {
                return Err(OpucError::Domain(format!(
                    "phi_{n} has nominal degree {}",
                    p.degree()
                )));
            }
            let lead = p.leading();
            if !(lead.re > 0.0) || lead.im.abs() > 1e-12 * lead.re {
                return Err(OpucError::InvalidReflectionData {
                    index: n,
                    reason: format!("leading coefficient {lead} is not a positive real"),
                });
            }
            kappa.push(lead.re);
            phi0.push(p.coeff(0));
            ell.push(if n == 0 { ZERO } else { p.coeff(n - 1) });
            phistar.push(p.reciprocal()?);
        }
        Ok(Self {
            kappa,
            phi0,
            ell,
            phi,
            phistar,
            weight,
            route,
        })
    }

    /// Szegő recurrence driven by `phi_1(0) ... phi_N(0)` with `phi_0 = kappa0`.
    pub fn build_from_phi0(phi0_seq: &[C64], kappa0: f64) -> Result<Self> {
        if !(kappa0 > 0.0 && kappa0.is_finite()) {
            return Err(OpucError::InvalidReflectionData {
                index: 0,
                reason: format!("kappa_0 = {kappa0} must be positive"),
            });
        }
        let mut phi = vec![ComplexPoly::constant(C64::new(kappa0, 0.0))];
        let mut kap = kappa0;
        for (i, &p0) in phi0_seq.iter().enumerate() {
            let n = i + 1;
            if !(p0.re.is_finite() && p0.im.is_finite()) {
                return Err(OpucError::InvalidReflectionData {
                    index: n,
                    reason: "non-finite phi_n(0)".into(),
                });
            }
            let next = (kap * kap + p0.norm_sqr()).sqrt();
            if !(next > 0.0) || p0.norm() >= next {
                return Err(OpucError::InvalidReflectionData {
                    index: n,
                    reason: format!("|phi_{n}(0)| = {} is not below kappa_{n} = {next}", p0.norm()),
                });
            }
            let prev = &phi[n - 1];
            let ps = prev.reciprocal_nominal();
            let a = C64::new(next / kap, 0.0);
            let b = p0 / kap;
            let mut p = &prev.shift(1).scale(a) + &ps.scale(b).padded(n);
            let mut cs = p.clone().into_coeffs();
            cs[n] = C64::new(next, 0.0);
            cs[0] = p0;
            p = ComplexPoly::new(cs);
            phi.push(p);
            kap = next;
        }
        Self::from_polys(phi, WeightSpec::Unspecified, Route::SzegoRecurrence)
    }

    /// Szegő recurrence driven by reflection coefficients `r_1 ... r_N`, `|r_n| < 1`.
    pub fn build_from_reflections(r: &[C64]) -> Result<Self> {
        let mut phi = vec![ComplexPoly::constant(ONE)];
        let mut kap = 1.0;
        for (i, &rn) in r.iter().enumerate() {
            let n = i + 1;
            let a = rn.norm();
            if !(a < 1.0) {
                return Err(OpucError::InvalidReflectionData {
                    index: n,
                    reason: format!("|r_{n}| = {a} is not below 1"),
                });
            }
            let rho = ((1.0 - a) * (1.0 + a)).sqrt();
            let next = kap / rho;
            let prev = &phi[n - 1];
            let ps = prev.reciprocal_nominal();
            let p = &prev.shift(1).scale_real(1.0 / rho) + &ps.scale(rn / rho).padded(n);
            let mut cs = p.into_coeffs();
            cs[n] = C64::new(next, 0.0);
            cs[0] = rn * next;
            phi.push(ComplexPoly::new(cs));
            kap = next;
        }
        Self::from_polys(phi, WeightSpec::Unspecified, Route::SzegoRecurrence)
    }

    pub fn with_weight(mut self, w: WeightSpec) -> Self {
        self.weight = w;
        self
    }

    pub fn with_route(mut self, r: Route) -> Self {
        self.route = r;
        self
    }

    /// Keep degrees `0 ..= n` only.
    pub fn truncated(&self, n: usize) -> Self {
        let k = (n + 1).min(self.phi.len());
        Self {
            kappa: self.kappa[..k].to_vec(),
            phi0: self.phi0[..k].to_vec(),
            ell: self.ell[..k].to_vec(),
            phi: self.phi[..k].to_vec(),
            phistar: self.phistar[..k].to_vec(),
            weight: self.weight.clone(),
            route: self.route,
        }
    }

    pub fn n_max(&self) -> usize {
        self.phi.len() - 1
    }
    pub fn kappa(&self, n: usize) -> f64 {
        self.kappa[n]
    }
    pub fn kappas(&self) -> &[f64] {
        &self.kappa
    }
    pub fn phi0(&self, n: usize) -> C64 {
        self.phi0[n]
    }
    pub fn phi0s(&self) -> &[C64] {
        &self.phi0
    }
    pub fn ell(&self, n: usize) -> C64 {
        self.ell[n]
    }
    pub fn ells(&self) -> &[C64] {
        &self.ell
    }
    pub fn phi(&self, n: usize) -> &ComplexPoly {
        &self.phi[n]
    }
    pub fn phistar(&self, n: usize) -> &ComplexPoly {
        &self.phistar[n]
    }
    pub fn weight(&self) -> &WeightSpec {
        &self.weight
    }
    pub fn route(&self) -> Route {
        self.route
    }

    /// `r_n = phi_n(0) / kappa_n`
    pub fn reflection(&self, n: usize) -> C64 {
        self.phi0[n] / self.kappa[n]
    }

    /// `phi_n(0)`, or an error when it vanishes.
    pub fn nonzero_phi0(&self, n: usize) -> Result<C64> {
        let p = self.phi0[n];
        if p.norm() < f64::MIN_POSITIVE {
            return Err(OpucError::DegenerateReflection { index: n });
        }
        Ok(p)
    }

    fn check_index(&self, n: usize, lo: usize, hi_offset: usize) -> Result<()> {
        if n < lo || n + hi_offset > self.n_max() {
            return Err(OpucError::Domain(format!(
                "index {n} outside {lo} ..= {}",
                self.n_max().saturating_sub(hi_offset)
            )));
        }
        Ok(())
    }

    /// `kappa_n z phi_n = kappa_{n+1} phi_{n+1} - phi_{n+1}(0) phi*_{n+1}`, coefficientwise.
    pub fn rec1_residual(&self, n: usize) -> Result<f64> {
        self.check_index(n, 0, 1)?;
        let c = C64::new(self.kappa[n], 0.0);
        Ok(coeff_residual(&[
            self.phi[n].shift(1).scale(c),
            self.phi[n + 1].scale_real(-self.kappa[n + 1]),
            self.phistar[n + 1].scale(self.phi0[n + 1]),
        ]))
    }

    /// `kappa_n phi_{n+1} = kappa_{n+1} z phi_n + phi_{n+1}(0) phi*_n`, coefficientwise.
    pub fn rec2_residual(&self, n: usize) -> Result<f64> {
        self.check_index(n, 0, 1)?;
        Ok(coeff_residual(&[
            self.phi[n + 1].scale_real(self.kappa[n]),
            self.phi[n].shift(1).scale_real(-self.kappa[n + 1]),
            self.phistar[n].scale(-self.phi0[n + 1]),
        ]))
    }

    /// Three-term recurrence between `phi_{n-1}, phi_n, phi_{n+1}`, worst sample.
    pub fn three_term_residual(&self, n: usize, zs: &[C64]) -> Result<f64> {
        self.check_index(n, 1, 1)?;
        let p0n = self.nonzero_phi0(n)?;
        let p0n1 = self.nonzero_phi0(n + 1)?;
        let (km, k, kp) = (self.kappa[n - 1], self.kappa[n], self.kappa[n + 1]);
        let mut worst: f64 = 0.0;
        for &z in zs {
            let t1 = p0n * k * self.phi[n + 1].eval(z);
            let t2 = p0n1 * km * z * self.phi[n - 1].eval(z);
            let t3 = -(p0n1 * k + p0n * kp * z) * self.phi[n].eval(z);
            worst = worst.max(point_residual(&[t1, t2, t3]));
        }
        Ok(worst)
    }

    /// `|kappa_n^2 - sum_{k<=n} |phi_k(0)|^2| / kappa_n^2`
    pub fn k_residual(&self, n: usize) -> Result<f64> {
        self.check_index(n, 0, 0)?;
        let s: f64 = self.phi0[..=n].iter().map(|p| p.norm_sqr()).sum();
        let k2 = self.kappa[n] * self.kappa[n];
        Ok((k2 - s).abs() / k2)
    }

    /// `kappa_n l_{n+1} = kappa_{n+1} l_n + conj(phi_n(0)) phi_{n+1}(0)`
    pub fn kl_residual(&self, n: usize) -> Result<f64> {
        self.check_index(n, 0, 1)?;
        let t = [
            self.ell[n + 1] * self.kappa[n],
            -self.ell[n] * self.kappa[n + 1],
            -self.phi0[n].conj() * self.phi0[n + 1],
        ];
        Ok(point_residual(&t))
    }

    /// `kappa_n sum_{j<n} conj(phi_j(0)) phi_{j+1}(0) / (kappa_j kappa_{j+1})`
    pub fn subleading_from_sum(&self, n: usize) -> Result<C64> {
        self.check_index(n, 1, 0)?;
        let s: C64 = (0..n)
            .map(|j| self.phi0[j].conj() * self.phi0[j + 1] / (self.kappa[j] * self.kappa[j + 1]))
            .sum();
        Ok(s * self.kappa[n])
    }

    /// Relative gap between the stored `l_n` and the sum formula.
    pub fn l_residual(&self, n: usize) -> Result<f64> {
        let s = self.subleading_from_sum(n)?;
        let scale: f64 = self.kappa[n]
            * (0..n)
                .map(|j| (self.phi0[j] * self.phi0[j + 1]).norm() / (self.kappa[j] * self.kappa[j + 1]))
                .sum::<f64>();
        let scale = scale.max(self.ell[n].norm()).max(f64::MIN_POSITIVE);
        Ok((s - self.ell[n]).norm() / scale)
    }

    /// `sum_{k<=n} conj(phi_k(a)) phi_k(z)`
    pub fn cd_kernel(&self, n: usize, a: C64, z: C64) -> Result<C64> {
        self.check_index(n, 0, 0)?;
        Ok((0..=n).map(|k| self.phi[k].eval(a).conj() * self.phi[k].eval(z)).sum())
    }

    /// `[conj(phi*_{n+1}(a)) phi*_{n+1}(z) - conj(phi_{n+1}(a)) phi_{n+1}(z)] / (1 - conj(a) z)`
    pub fn cd_closed_form(&self, n: usize, a: C64, z: C64) -> Result<C64> {
        self.check_index(n, 0, 1)?;
        let den = 1.0 - a.conj() * z;
        if den.norm() < 1e-13 {
            return Err(OpucError::PoleAtUnimodularProduct);
        }
        let ps = &self.phistar[n + 1];
        let p = &self.phi[n + 1];
        Ok((ps.eval(a).conj() * ps.eval(z) - p.eval(a).conj() * p.eval(z)) / den)
    }

    /// Relative gap between the direct kernel sum and its closed form.
    pub fn cd_residual(&self, n: usize, a: C64, z: C64) -> Result<f64> {
        let lhs = self.cd_kernel(n, a, z)?;
        let rhs = self.cd_closed_form(n, a, z)?;
        let scale: f64 = (0..=n)
            .map(|k| self.phi[k].eval(a).norm() * self.phi[k].eval(z).norm())
            .sum();
        Ok((lhs - rhs).norm() / scale.max(f64::MIN_POSITIVE))
    }

    /// Largest violation of the structural invariants over the whole system.
    pub fn invariant_residuals(&self) -> InvariantResiduals {
        let n = self.n_max();
        let mut r = InvariantResiduals::default();
        for k in 0..=n {
            r.k = r.k.max(self.k_residual(k).unwrap_or(0.0));
            if k < n {
                r.rec1 = r.rec1.max(self.rec1_residual(k).unwrap_or(f64::INFINITY));
                r.rec2 = r.rec2.max(self.rec2_residual(k).unwrap_or(f64::INFINITY));
                r.kl = r.kl.max(self.kl_residual(k).unwrap_or(f64::INFINITY));
                if self.kappa[k + 1] < self.kappa[k] {
                    r.kappa_monotone = false;
                }
            }
            if k >= 1 {
                r.l = r.l.max(self.l_residual(k).unwrap_or(f64::INFINITY));
                r.max_reflection = r.max_reflection.max(self.reflection(k).norm());
            }
            if let Ok(s) = self.phi[k].reciprocal() {
                r.star = r.star.max(s.rel_diff(&self.phistar[k]));
            }
        }
        r
    }

    /// Largest coefficientwise relative difference from another system.
    pub fn rel_diff(&self, other: &OpucSystem, n_max: usize) -> f64 {
        (0..=n_max.min(self.n_max()).min(other.n_max()))
            .map(|n| self.phi[n].rel_diff(&other.phi[n]))
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InvariantResiduals {
    pub rec1: f64,
    pub rec2: f64,
    pub k: f64,
    pub kl: f64,
    pub l: f64,
    pub star: f64,
    pub max_reflection: f64,
    pub kappa_monotone: bool,
}

impl Default for InvariantResiduals {
    fn default() -> Self {
        Self {
            rec1: 0.0,
            rec2: 0.0,
            k: 0.0,
            kl: 0.0,
            l: 0.0,
            star: 0.0,
            max_reflection: 0.0,
            kappa_monotone: true,
        }
    }
}

/// Reflection coefficients drawn uniformly from the disk of radius `rmax`.
pub fn random_reflections(n: usize, rmax: f64, seed: u64) -> Vec<C64> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let r = rmax * rng.gen::<f64>().sqrt();
            let th = rng.gen_range(0.0..std::f64::consts::TAU);
            C64::from_polar(r, th)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn circle(r: f64, k: usize) -> Vec<C64> {
        (0..k)
            .map(|j| C64::from_polar(r, 0.3 + std::f64::consts::TAU * j as f64 / k as f64))
            .collect()
    }

    #[test]
    fn zero_reflections_give_monomials() {
        let s = OpucSystem::build_from_phi0(&[ZERO; 6], 1.0).unwrap();
        for n in 0..=6 {
            assert_eq!(s.kappa(n), 1.0);
            assert!(s.phi(n).rel_diff(&ComplexPoly::monomial(n, ONE)) == 0.0);
        }
        assert!(matches!(
            s.three_term_residual(2, &circle(0.5, 4)),
            Err(OpucError::DegenerateReflection { .. })
        ));
        assert_eq!(s.subleading_from_sum(1).unwrap(), ZERO);
    }

    #[test]
    fn first_circular_jacobi_member() {
        let s = OpucSystem::build_from_phi0(&[C64::new(1.0 / 3f64.sqrt(), 0.0)], 1.0).unwrap();
        assert!((s.kappa(1) - 2.0 / 3f64.sqrt()).abs() < 1e-15);
        let e = ComplexPoly::from_real(&[1.0, 2.0]).scale_real(1.0 / 3f64.sqrt());
        assert!(s.phi(1).rel_diff(&e) < 1e-15);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(OpucSystem::build_from_phi0(&[ONE], 0.0).is_err());
        assert!(OpucSystem::build_from_reflections(&[C64::new(0.3, 0.0), C64::new(1.0, 0.0)]).is_err());
    }

    #[test]
    fn random_system_identities() {
        let r = random_reflections(30, 0.9, 7);
        let s = OpucSystem::build_from_reflections(&r).unwrap();
        let inv = s.invariant_residuals();
        assert!(inv.rec1 < 1e-12 && inv.rec2 < 1e-12, "{inv:?}");
        assert!(inv.k < 1e-12 && inv.kl < 1e-12 && inv.l < 1e-11, "{inv:?}");
        assert!(inv.kappa_monotone && inv.max_reflection < 1.0);
        for n in 1..30 {
            assert!(s.three_term_residual(n, &circle(0.5, 16)).unwrap() < 1e-11);
        }
        assert!(s.kl_residual(5).unwrap() < 1e-13);
    }

    #[test]
    fn phi0_and_reflection_routes_agree() {
        let r = random_reflections(12, 0.8, 3);
        let a = OpucSystem::build_from_reflections(&r).unwrap();
        let b = OpucSystem::build_from_phi0(&a.phi0s()[1..], 1.0).unwrap();
        assert!(a.rel_diff(&b, 12) < 1e-13);
    }

    #[test]
    fn cd_examples() {
        let leb = OpucSystem::build_from_phi0(&[ZERO; 5], 1.0).unwrap();
        assert!((leb.cd_kernel(3, ZERO, ZERO).unwrap() - ONE).norm() < 1e-15);
        assert!((leb.cd_kernel(3, ONE, ONE).unwrap() - C64::new(4.0, 0.0)).norm() < 1e-15);
        assert!(leb.cd_closed_form(3, ONE, ONE).is_err());
        let r = random_reflections(13, 0.9, 11);
        let s = OpucSystem::build_from_reflections(&r).unwrap();
        let v = s.cd_kernel(12, ZERO, ZERO).unwrap();
        assert!((v.re - s.kappa(12).powi(2)).abs() < 1e-12 * v.re);
        let a = C64::from_polar(1.0, 0.2);
        assert!(matches!(s.cd_closed_form(3, a, a), Err(OpucError::PoleAtUnimodularProduct)));
    }
}
