//! Weight functions on the unit circle.

use crate::error::{OpucError, Result};
use crate::poly::QReal;
use crate::special::{bessel_i, gamma, pochhammer, q_poch, QLen};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::PI;

/// A weight `w(theta)` normalized so that `int_0^{2pi} w dtheta = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum WeightSpec {
    Lebesgue,
    CircularJacobi { a: f64 },
    Szego { a: f64, b: f64 },
    ModifiedBessel { t: f64 },
    RogersSzego { q: f64 },
    /// Moments `c_0 ... c_N`; negative indices follow by conjugation.
    CustomMoments { moments: Vec<C64> },
    /// System given only through reflection data.
    Unspecified,
}

fn is_nonneg_integer(x: f64) -> bool {
    x >= 0.0 && x.fract() == 0.0
}

impl WeightSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(OpucError::Domain(m));
        match *self {
            WeightSpec::CircularJacobi { a } if !(a > -0.5) => bad(format!("a = {a} must exceed -1/2")),
            WeightSpec::Szego { a, b } if !(a > -0.5 && b > -0.5) => {
                bad(format!("(a, b) = ({a}, {b}) must both exceed -1/2"))
            }
            WeightSpec::ModifiedBessel { t } if !(t.abs() <= 50.0) => bad(format!("|t| = {t} exceeds 50")),
            WeightSpec::RogersSzego { q } => QReal::new(q).map(|_| ()),
            WeightSpec::CustomMoments { ref moments } => {
                if moments.is_empty() || !(moments[0].re > 0.0) {
                    bad("custom moments need c_0 > 0".into())
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            WeightSpec::Lebesgue => "lebesgue",
            WeightSpec::CircularJacobi { .. } => "cj",
            WeightSpec::Szego { .. } => "sz",
            WeightSpec::ModifiedBessel { .. } => "mb",
            WeightSpec::RogersSzego { .. } => "rs",
            WeightSpec::CustomMoments { .. } => "custom",
            WeightSpec::Unspecified => "unspecified",
        }
    }

    /// Scalar parameters by name.
    pub fn params(&self) -> BTreeMap<String, f64> {
        let kv: Vec<(&str, f64)> = match *self {
            WeightSpec::CircularJacobi { a } => vec![("a", a)],
            WeightSpec::Szego { a, b } => vec![("a", a), ("b", b)],
            WeightSpec::ModifiedBessel { t } => vec![("t", t)],
            WeightSpec::RogersSzego { q } => vec![("q", q)],
            _ => vec![],
        };
        kv.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
    }

    pub fn has_density(&self) -> bool {
        !matches!(self, WeightSpec::CustomMoments { .. } | WeightSpec::Unspecified)
    }

    /// True when the density has an algebraic endpoint singularity at `theta = 0` or `pi`.
    pub fn is_singular(&self) -> bool {
        match *self {
            WeightSpec::CircularJacobi { a } => !is_nonneg_integer(a),
            WeightSpec::Szego { a, b } => !(is_nonneg_integer(a) && is_nonneg_integer(b)),
            _ => false,
        }
    }

    /// Constant `C` with `w = C * shape(theta)`.
    pub fn normalization(&self) -> Result<f64> {
        self.validate()?;
        Ok(match *self {
            WeightSpec::Lebesgue => 1.0 / (2.0 * PI),
            WeightSpec::CircularJacobi { a } => {
                gamma(a + 1.0).powi(2) / (2.0 * PI * gamma(2.0 * a + 1.0))
            }
            WeightSpec::Szego { a, b } => {
                gamma(a + b + 1.0)
                    / (2f64.powf(1.0 + 2.0 * a + 2.0 * b) * gamma(a + 0.5) * gamma(b + 0.5))
            }
            WeightSpec::ModifiedBessel { t } => 1.0 / (2.0 * PI * bessel_i(0, t)?),
            WeightSpec::RogersSzego { q } => q_poch(q, q, QLen::Infinite) / (2.0 * PI),
            WeightSpec::CustomMoments { .. } | WeightSpec::Unspecified => {
                return Err(OpucError::Domain("weight has no density".into()))
            }
        })
    }

    /// Unnormalized shape of the density at angle `theta`.
    pub fn shape(&self, theta: f64) -> f64 {
        match *self {
            WeightSpec::Lebesgue => 1.0,
            WeightSpec::CircularJacobi { a } => {
                let s = (2.0 * (0.5 * theta).sin()).abs();
                if s == 0.0 {
                    return if a == 0.0 { 1.0 } else if a > 0.0 { 0.0 } else { f64::INFINITY };
                }
                s.powf(2.0 * a)
            }
            WeightSpec::Szego { a, b } => {
                let s = (2.0 * (0.5 * theta).sin()).abs();
                let c = (2.0 * (0.5 * theta).cos()).abs();
                let pa = if s == 0.0 { zero_pow(a) } else { s.powf(2.0 * a) };
                let pb = if c == 0.0 { zero_pow(b) } else { c.powf(2.0 * b) };
                pa * pb
            }
            WeightSpec::ModifiedBessel { t } => (t * theta.cos()).exp(),
            WeightSpec::RogersSzego { q } => {
                let z = C64::from_polar(1.0, theta);
                let mut p = 1.0;
                let mut f = q.sqrt();
                while f >= 1e-17 {
                    p *= (1.0 - z * f).norm_sqr();
                    f *= q;
                }
                p
            }
            WeightSpec::CustomMoments { .. } | WeightSpec::Unspecified => f64::NAN,
        }
    }

    /// Shape at `zeta = e^{i theta}`, with the distances `|1 -+ zeta|` taken
    /// from `zeta` itself so nodes next to `zeta = +-1` keep full precision.
    pub fn shape_at(&self, zeta: C64) -> f64 {
        let dist = |z: C64, e: f64| {
            let r = z.norm();
            if r == 0.0 {
                zero_pow(e)
            } else {
                r.powf(2.0 * e)
            }
        };
        match *self {
            WeightSpec::CircularJacobi { a } => dist(1.0 - zeta, a),
            WeightSpec::Szego { a, b } => dist(1.0 - zeta, a) * dist(1.0 + zeta, b),
            _ => self.shape(zeta.arg()),
        }
    }

    /// Normalized density.
    pub fn density(&self, theta: f64) -> Result<f64> {
        Ok(self.normalization()? * self.shape(theta))
    }

    /// Closed-form trigonometric moment `c_j = int e^{-i j theta} w dtheta`, where known.
    pub fn exact_moment(&self, j: i64) -> Option<C64> {
        let k = j.unsigned_abs() as usize;
        let re = |x: f64| Some(C64::new(x, 0.0));
        match *self {
            WeightSpec::Lebesgue => re(if j == 0 { 1.0 } else { 0.0 }),
            WeightSpec::CircularJacobi { a } => re(pochhammer(-a, k) / pochhammer(a + 1.0, k)),
            WeightSpec::ModifiedBessel { t } => {
                re(bessel_i(k as i64, t).ok()? / bessel_i(0, t).ok()?)
            }
            WeightSpec::RogersSzego { q } => {
                let s = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
                re(s * q.powf((k * k) as f64 / 2.0))
            }
            WeightSpec::CustomMoments { ref moments } => {
                let c = *moments.get(k)? / moments[0].re;
                Some(if j < 0 { c.conj() } else { c })
            }
            _ => None,
        }
    }
}

fn zero_pow(e: f64) -> f64 {
    if e == 0.0 {
        1.0
    } else if e > 0.0 {
        0.0
    } else {
        f64::INFINITY
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation_ranges() {
        assert!(WeightSpec::CircularJacobi { a: -0.5 }.validate().is_err());
        assert!(WeightSpec::CircularJacobi { a: -0.49 }.validate().is_ok());
        assert!(WeightSpec::Szego { a: 1.0, b: -0.6 }.validate().is_err());
        assert!(WeightSpec::ModifiedBessel { t: 50.5 }.validate().is_err());
        assert!(WeightSpec::RogersSzego { q: 1.0 }.validate().is_err());
    }

    #[test]
    fn circular_jacobi_is_szego_with_b_zero() {
        for &a in &[0.3, 1.0, 2.5] {
            let x = WeightSpec::CircularJacobi { a }.normalization().unwrap();
            let y = WeightSpec::Szego { a, b: 0.0 }.normalization().unwrap();
            assert!((x - y).abs() < 1e-13 * x);
        }
    }
}
