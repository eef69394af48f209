//! Zeros of polynomials, unit-disk containment, and the electrostatic
//! picture of the zeros of `phi_n` as stationary points of
//! `T(z_1..z_n) = prod z_j^{1-n} e^{-v(z_j)} / A_n(z_j) prod_{j<k} (z_j - z_k)^2`.

use crate::error::{OpucError, Result};
use crate::ladder::{ExternalField, Ladder};
use crate::logval::LogValue;
use crate::poly::{ComplexPoly, ZERO};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::io::Write;

pub const MAX_ITER: usize = 200;
const START_OFFSET: f64 = 1e-3;
pub const DISK_MARGIN: f64 = 1e-10;
pub const MIN_CHARGE_DISTANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootSet {
    /// Sorted by argument, then modulus.
    pub roots: Vec<C64>,
    /// `|p(z_j)| / sum |a_k| |z_j|^k`
    pub residuals: Vec<f64>,
    pub iterations: usize,
}

impl RootSet {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().fold(0.0, |m, &r| m.max(r))
    }

    pub fn max_modulus(&self) -> f64 {
        self.roots.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    /// `lc * prod (z - z_j)` expanded.
    pub fn reconstruct(&self, lc: C64) -> ComplexPoly {
        let mut c = vec![lc];
        for &r in &self.roots {
            let mut next = vec![ZERO; c.len() + 1];
            for (k, &a) in c.iter().enumerate() {
                next[k + 1] += a;
                next[k] -= a * r;
            }
            c = next;
        }
        ComplexPoly::new(c)
    }

    /// Rows `re, im, abs, residual`.
    pub fn write_csv<W: Write>(&self, w: W) -> std::io::Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["re", "im", "abs", "residual"])?;
        for (z, r) in self.roots.iter().zip(&self.residuals) {
            out.write_record(&[
                format!("{:e}", z.re),
                format!("{:e}", z.im),
                format!("{:e}", z.norm()),
                format!("{:e}", r),
            ])?;
        }
        out.flush()
    }
}

fn backward_residual(p: &ComplexPoly, z: C64) -> f64 {
    let scale = p.abs_eval(C64::new(z.norm(), 0.0));
    if scale == 0.0 {
        0.0
    } else {
        p.eval(z).norm() / scale
    }
}

fn arg_order(a: &C64, b: &C64) -> std::cmp::Ordering {
    a.arg()
        .partial_cmp(&b.arg())
        .unwrap_or(std::cmp::Ordering::Equal)
        .then(a.norm().partial_cmp(&b.norm()).unwrap_or(std::cmp::Ordering::Equal))
}

/// All zeros of `p` by Aberth–Ehrlich iteration with Gauss–Seidel updates,
/// followed by one Newton step per root.
pub fn roots(p: &ComplexPoly) -> Result<RootSet> {
    let p = p.trimmed();
    let n = p.degree();
    if n == 0 {
        return Err(OpucError::Domain("root finding needs degree >= 1".into()));
    }
    if p.leading() == ZERO {
        return Err(OpucError::ZeroLeadingCoefficient);
    }
    let zeros_at_origin = p.coeffs().iter().take_while(|c| **c == ZERO).count();
    let q = ComplexPoly::new(p.coeffs()[zeros_at_origin..].to_vec());
    let m = q.degree();
    let mut z: Vec<C64> = Vec::with_capacity(m);
    let mut iterations = 0;
    if m > 0 {
        let dq = q.derivative();
        let radius = (q.coeff(0).norm() / q.leading().norm()).powf(1.0 / m as f64);
        for k in 0..m {
            let ang = 2.0 * std::f64::consts::PI * k as f64 / m as f64 + START_OFFSET;
            z.push(C64::from_polar(radius, ang));
        }
        let mut converged = false;
        while iterations < MAX_ITER {
            iterations += 1;
            let mut max_step: f64 = 0.0;
            let mut settled = true;
            for j in 0..m {
                let zj = z[j];
                let pv = q.eval(zj);
                if pv == ZERO {
                    continue;
                }
                let ratio = pv / dq.eval(zj);
                let mut s = ZERO;
                for (k, &zk) in z.iter().enumerate() {
                    if k != j {
                        s += 1.0 / (zj - zk);
                    }
                }
                let step = ratio / (1.0 - ratio * s);
                if !step.is_finite() {
                    continue;
                }
                z[j] = zj - step;
                max_step = max_step.max(step.norm() / (1.0 + zj.norm()));
                if backward_residual(&q, z[j]) > 4.0 * f64::EPSILON * m as f64 {
                    settled = false;
                }
            }
            if max_step < 1e-14 || (settled && max_step < 1e-10) {
                converged = true;
                break;
            }
        }
        let worst = z.iter().fold(0.0f64, |w, &r| w.max(backward_residual(&q, r)));
        if !converged && worst > 1e-10 {
            return Err(OpucError::NoConvergence { worst_residual: worst });
        }
        for r in z.iter_mut() {
            let d = dq.eval(*r);
            if d != ZERO {
                let cand = *r - q.eval(*r) / d;
                if cand.is_finite() && backward_residual(&q, cand) <= backward_residual(&q, *r) {
                    *r = cand;
                }
            }
        }
    }
    z.extend(std::iter::repeat_n(ZERO, zeros_at_origin));
    z.sort_by(arg_order);
    let residuals = z.iter().map(|&r| backward_residual(&p, r)).collect();
    Ok(RootSet { roots: z, residuals, iterations })
}

/// `max |z_j| < 1 - 1e-10`
pub fn assert_in_disk(rs: &RootSet) -> bool {
    rs.max_modulus() < 1.0 - DISK_MARGIN
}

fn check_charges(zs: &[C64]) -> Result<()> {
    let mut dmin = f64::INFINITY;
    for j in 0..zs.len() {
        if zs[j] == ZERO {
            return Err(OpucError::Domain("charge at the origin".into()));
        }
        for k in j + 1..zs.len() {
            dmin = dmin.min((zs[j] - zs[k]).norm());
        }
    }
    if dmin < MIN_CHARGE_DISTANCE {
        return Err(OpucError::CoincidentCharges { min_distance: dmin });
    }
    Ok(())
}

fn exp_log(w: C64) -> LogValue {
    LogValue { log_abs: w.re, phase: C64::from_polar(1.0, w.im) }
}

/// `T(z_1..z_n)` in log form.
pub fn t_function(zs: &[C64], field: &dyn ExternalField, lad: &dyn Ladder, n: usize) -> Result<LogValue> {
    check_charges(zs)?;
    let mut t = LogValue::ONE;
    for &z in zs {
        let (a, _) = lad.ab(n, z)?;
        if a.norm() < 1e-300 {
            return Err(OpucError::PoleOfA);
        }
        t = t
            .mul(LogValue::from_complex(z).powi(1 - n as i64))
            .mul(exp_log(field.neg_v(z)))
            .div(LogValue::from_complex(a));
    }
    Ok(t.mul(pair_product(zs)))
}

fn pair_product(zs: &[C64]) -> LogValue {
    let mut t = LogValue::ONE;
    for j in 0..zs.len() {
        for k in j + 1..zs.len() {
            t = t.mul(LogValue::from_complex(zs[j] - zs[k]).powi(2));
        }
    }
    t
}

/// The circular-Jacobi display
/// `prod z_j^{1-n-a} (1-z_j)^{a+1} (z_j-1)^a prod_{j<k} (z_j - z_k)^2`.
pub fn cj_t_function(a: f64, zs: &[C64]) -> Result<LogValue> {
    check_charges(zs)?;
    let n = zs.len() as f64;
    let one = C64::new(1.0, 0.0);
    let mut t = LogValue::ONE;
    for &z in zs {
        t = t.mul(exp_log((1.0 - n - a) * z.ln() + (a + 1.0) * (one - z).ln() + a * (z - one).ln()));
    }
    Ok(t.mul(pair_product(zs)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stationarity {
    /// `max_j |-v' - A'/A - (n-1)/z + 2 sum 1/(z_j - z_k)|`, each term set
    /// against the largest of its parts.
    pub gradient: f64,
    /// `2 sum_k 1/(z_j - z_k)` against `f''(z_j)/f'(z_j)`.
    pub two_body: f64,
}

/// Pair sums `2 sum_{k != j} 1/(z_j - z_k)`.
pub fn pair_sums(zs: &[C64]) -> Vec<C64> {
    zs.iter()
        .enumerate()
        .map(|(j, &zj)| {
            let mut s = ZERO;
            for (k, &zk) in zs.iter().enumerate() {
                if k != j {
                    s += 1.0 / (zj - zk);
                }
            }
            2.0 * s
        })
        .collect()
}

fn rel_sum(parts: &[C64]) -> f64 {
    let total: C64 = parts.iter().sum();
    let scale = parts.iter().fold(0.0f64, |m, p| m.max(p.norm()));
    if scale == 0.0 {
        0.0
    } else {
        total.norm() / scale
    }
}

/// Residual of the stationarity system at the charges `zs`.
pub fn stationarity_residual(
    zs: &[C64],
    field: &dyn ExternalField,
    lad: &dyn Ladder,
    n: usize,
) -> Result<Stationarity> {
    check_charges(zs)?;
    let sums = pair_sums(zs);
    let f = roots_poly(zs);
    let mut gradient: f64 = 0.0;
    let mut two_body: f64 = 0.0;
    for (j, &z) in zs.iter().enumerate() {
        let (a, _) = lad.ab(n, z)?;
        let (da, _) = lad.dab(n, z)?;
        if a.norm() < 1e-300 {
            return Err(OpucError::PoleOfA);
        }
        let parts = [-field.vprime(z), -da / a, -(n as f64 - 1.0) / z, sums[j]];
        gradient = gradient.max(rel_sum(&parts));
        let (_, d1, d2) = f.eval_d2(z);
        two_body = two_body.max(rel_sum(&[sums[j], -d2 / d1]));
    }
    Ok(Stationarity { gradient, two_body })
}

fn roots_poly(zs: &[C64]) -> ComplexPoly {
    RootSet { roots: zs.to_vec(), residuals: vec![], iterations: 0 }.reconstruct(C64::new(1.0, 0.0))
}

/// `(1-n-a)/z_j - (2a+1)/(1-z_j) + 2 sum 1/(z_j - z_k)`
pub fn cj_stationarity_residual(a: f64, zs: &[C64]) -> Result<f64> {
    check_charges(zs)?;
    let n = zs.len() as f64;
    let sums = pair_sums(zs);
    Ok(zs.iter().zip(&sums).fold(0.0f64, |m, (&z, &s)| {
        m.max(rel_sum(&[(1.0 - n - a) / z, -(2.0 * a + 1.0) / (1.0 - z), s]))
    }))
}

/// The Szegő stationarity system, including the term from `A_n'/A_n`.
pub fn sz_stationarity_residual(a: f64, b: f64, zs: &[C64]) -> Result<f64> {
    check_charges(zs)?;
    let n = zs.len();
    let nf = n as f64;
    let (s, d) = if n.is_multiple_of(2) { (a + b, a - b) } else { (a - b, a + b) };
    let sums = pair_sums(zs);
    Ok(zs.iter().zip(&sums).fold(0.0f64, |m, (&z, &ps)| {
        m.max(rel_sum(&[
            (1.0 - nf - a - b) / z,
            -(2.0 * a + 1.0) / (1.0 - z),
            (2.0 * b + 1.0) / (1.0 + z),
            -d / (s + d * z),
            ps,
        ]))
    }))
}

/// `max_j |f''(z_j) + P(z_j) f'(z_j)|` relative to the larger term.
/// `P` is given as a list of terms so the residual is scaled by each of them.
pub fn ode_at_zeros_residual(f: &ComplexPoly, zs: &[C64], p_terms: impl Fn(C64) -> Vec<C64>) -> f64 {
    zs.iter().fold(0.0f64, |m, &z| {
        let (_, d1, d2) = f.eval_d2(z);
        let mut parts: Vec<C64> = p_terms(z).into_iter().map(|t| t * d1).collect();
        parts.push(d2);
        m.max(rel_sum(&parts))
    })
}

/// `Q = -(z(1-z) f'' + ((1-n-a)(1-z) - (2a+1) z) f') / f` at each point.
pub fn cj_q_values(a: f64, f: &ComplexPoly, zs: &[C64]) -> Vec<C64> {
    let n = f.degree() as f64;
    zs.iter()
        .map(|&z| {
            let (v, d1, d2) = f.eval_d2(z);
            -(z * (1.0 - z) * d2 + ((1.0 - n - a) * (1.0 - z) - (2.0 * a + 1.0) * z) * d1) / v
        })
        .collect()
}

/// `Q(z) = -(f'' + P f') / f` at each point.
pub fn q_from_p(f: &ComplexPoly, zs: &[C64], p: impl Fn(C64) -> C64) -> Vec<C64> {
    zs.iter()
        .map(|&z| {
            let (v, d1, d2) = f.eval_d2(z);
            -(d2 + p(z) * d1) / v
        })
        .collect()
}

/// Largest relative spread `|Q_i - Q_0| / |Q_0|`.
pub fn spread(vals: &[C64]) -> f64 {
    let q0 = vals[0];
    vals.iter().fold(0.0f64, |m, v| m.max((v - q0).norm() / q0.norm().max(f64::MIN_POSITIVE)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{cj_ladder, cj_system, Field};
    use crate::ladder::RationalLadder;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn monomial_roots_are_zero() {
        let rs = roots(&ComplexPoly::monomial(5, c(1.0, 0.0))).unwrap();
        assert!(rs.roots.iter().all(|z| *z == ZERO));
    }

    #[test]
    fn linear_root() {
        let p = ComplexPoly::from_real(&[1.0 / 3f64.sqrt(), 2.0 / 3f64.sqrt()]);
        let rs = roots(&p).unwrap();
        assert!((rs.roots[0] - c(-0.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn cyclotomic_roots() {
        let rs = roots(&ComplexPoly::from_real(&[1.0, 1.0, 1.0])).unwrap();
        let w = C64::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0);
        assert!((rs.roots[0] - w.conj()).norm() < 1e-15);
        assert!((rs.roots[1] - w).norm() < 1e-15);
        assert!(!assert_in_disk(&rs));
    }

    #[test]
    fn outside_root_fails_disk() {
        let rs = roots(&ComplexPoly::from_real(&[-2.0, 1.0])).unwrap();
        assert!(!assert_in_disk(&rs));
    }

    #[test]
    fn single_charge_cj() {
        let zs = [c(-0.5, 0.0)];
        assert!(cj_stationarity_residual(1.0, &zs).unwrap() < 1e-16);
        let lad = RationalLadder { make: |n| cj_ladder(1.0, n) };
        let f = Field::CircularJacobi { a: 1.0 };
        let s = stationarity_residual(&zs, &f, &lad, 1).unwrap();
        assert!(s.gradient < 1e-15);
    }

    #[test]
    fn t_is_symmetric() {
        let sys = cj_system(1.0, 6).unwrap();
        let rs = roots(sys.phi(6)).unwrap();
        let lad = RationalLadder { make: |n| cj_ladder(1.0, n) };
        let f = Field::CircularJacobi { a: 1.0 };
        let t1 = t_function(&rs.roots, &f, &lad, 6).unwrap();
        let mut rev = rs.roots.clone();
        rev.reverse();
        rev.swap(0, 3);
        let t2 = t_function(&rev, &f, &lad, 6).unwrap();
        assert!(t1.log_abs.is_finite());
        assert!(t1.rel_diff(t2) < 1e-13);
    }

    #[test]
    fn coincident_charges_rejected() {
        let zs = [c(0.1, 0.0), c(0.1, 1e-14)];
        assert!(matches!(cj_t_function(1.0, &zs), Err(OpucError::CoincidentCharges { .. })));
    }
}
