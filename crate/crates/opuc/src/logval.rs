//! Numbers held as `exp(log_abs) * phase` with `|phase| = 1`.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogValue {
    pub log_abs: f64,
    pub phase: C64,
}

impl LogValue {
    pub const ONE: LogValue = LogValue {
        log_abs: 0.0,
        phase: C64::new(1.0, 0.0),
    };

    pub fn from_complex(z: C64) -> Self {
        let r = z.norm();
        if r == 0.0 {
            return LogValue {
                log_abs: f64::NEG_INFINITY,
                phase: C64::new(1.0, 0.0),
            };
        }
        LogValue {
            log_abs: r.ln(),
            phase: z / r,
        }
    }

    pub fn from_real(x: f64) -> Self {
        Self::from_complex(C64::new(x, 0.0))
    }

    pub fn mul(self, o: LogValue) -> LogValue {
        let p = self.phase * o.phase;
        LogValue {
            log_abs: self.log_abs + o.log_abs,
            phase: p / p.norm(),
        }
    }

    pub fn mul_c(self, z: C64) -> LogValue {
        self.mul(LogValue::from_complex(z))
    }

    pub fn inv(self) -> LogValue {
        LogValue {
            log_abs: -self.log_abs,
            phase: self.phase.conj(),
        }
    }

    pub fn div(self, o: LogValue) -> LogValue {
        self.mul(o.inv())
    }

    pub fn powi(self, k: i64) -> LogValue {
        let mut ph = C64::new(1.0, 0.0);
        let base = if k >= 0 { self.phase } else { self.phase.conj() };
        for _ in 0..k.unsigned_abs() {
            ph *= base;
            ph /= ph.norm();
        }
        LogValue {
            log_abs: self.log_abs * k as f64,
            phase: ph,
        }
    }

    /// Value as an ordinary complex number, if it is representable.
    pub fn to_complex(self) -> Option<C64> {
        if self.log_abs.abs() < 300.0 {
            Some(self.phase * self.log_abs.exp())
        } else if self.log_abs == f64::NEG_INFINITY {
            Some(C64::new(0.0, 0.0))
        } else {
            None
        }
    }

    /// `|self/other - 1|`, computed without leaving log space.
    pub fn rel_diff(self, other: LogValue) -> f64 {
        if self.log_abs == f64::NEG_INFINITY && other.log_abs == f64::NEG_INFINITY {
            return 0.0;
        }
        let d = self.log_abs - other.log_abs;
        if d.abs() > 50.0 {
            return f64::INFINITY;
        }
        (self.phase * other.phase.conj() * d.exp() - 1.0).norm()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_and_products() {
        let a = C64::new(-3.0, 4.0);
        let b = C64::new(0.5, -0.25);
        let la = LogValue::from_complex(a);
        assert!((la.to_complex().unwrap() - a).norm() < 1e-14);
        let p = la.mul(LogValue::from_complex(b)).to_complex().unwrap();
        assert!((p - a * b).norm() < 1e-14);
        let q = la.div(LogValue::from_complex(b)).to_complex().unwrap();
        assert!((q - a / b).norm() < 1e-13);
        let c = la.powi(-3).to_complex().unwrap();
        assert!((c - a.powi(-3)).norm() < 1e-16);
        assert!(la.rel_diff(la) < 1e-16);
    }

    #[test]
    fn huge_values_stay_finite() {
        let big = LogValue::from_real(1e200).mul(LogValue::from_real(1e200));
        assert!(big.to_complex().is_none());
        assert!((big.log_abs - 400.0 * 10f64.ln()).abs() < 1e-12);
    }
}
