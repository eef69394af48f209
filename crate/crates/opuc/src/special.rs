//! Scalar special functions: shifted factorials, q-products, Bessel I,
//! terminating Gauss series and Jacobi polynomials.

use crate::dd::DD;
use crate::error::{OpucError, Result};
use crate::poly::QReal;
use num_complex::Complex64 as C64;

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSumC {
    re: KahanSum,
    im: KahanSum,
}

impl KahanSumC {
    pub fn add(&mut self, z: C64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    pub fn value(&self) -> C64 {
        C64::new(self.re.value(), self.im.value())
    }
}

/// `(a)_n = a (a+1) ... (a+n-1)`
pub fn pochhammer(a: f64, n: usize) -> f64 {
    (0..n).fold(1.0, |p, k| p * (a + k as f64))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QLen {
    Finite(usize),
    Infinite,
}

/// `(a; q)_n = prod_{k<n} (1 - a q^k)`; the infinite product stops once
/// `|a q^k| < 1e-17`.
pub fn q_pochhammer(a: f64, q: QReal, n: QLen) -> f64 {
    q_poch(a, q.q, n)
}

pub(crate) fn q_poch(a: f64, q: f64, n: QLen) -> f64 {
    let mut p = 1.0;
    let mut aq = a;
    match n {
        QLen::Finite(n) => {
            for _ in 0..n {
                p *= 1.0 - aq;
                aq *= q;
            }
        }
        QLen::Infinite => {
            while aq.abs() >= 1e-17 {
                p *= 1.0 - aq;
                aq *= q;
            }
        }
    }
    p
}

/// Modified Bessel function `I_nu(t)` of integer order by its ascending series.
pub fn bessel_i(nu: i64, t: f64) -> Result<f64> {
    let nu = nu.unsigned_abs() as usize;
    if !(t.abs() <= 50.0) {
        return Err(OpucError::Domain(format!("|t| = {} exceeds 50", t.abs())));
    }
    let x = 0.5 * t;
    let mut term = 1.0;
    for k in 1..=nu {
        term *= x / k as f64;
    }
    if term == 0.0 {
        return Ok(0.0);
    }
    let x2 = x * x;
    let mut sum = KahanSum::default();
    sum.add(term);
    let mut k = 0usize;
    loop {
        k += 1;
        term *= x2 / (k as f64 * (k + nu) as f64);
        sum.add(term);
        if term.abs() < 1e-17 * sum.value().abs() {
            break;
        }
    }
    Ok(sum.value())
}

/// `I_nu(t)` carried in double-double arithmetic.
pub fn bessel_i_dd(nu: i64, t: f64) -> Result<DD> {
    let nu = nu.unsigned_abs() as usize;
    if !(t.abs() <= 50.0) {
        return Err(OpucError::Domain(format!("|t| = {} exceeds 50", t.abs())));
    }
    let x = DD::new(0.5 * t);
    let mut term = DD::ONE;
    for k in 1..=nu {
        term = term * x / DD::new(k as f64);
    }
    if term.hi == 0.0 {
        return Ok(DD::ZERO);
    }
    let x2 = x * x;
    let mut sum = term;
    let mut k = 0usize;
    loop {
        k += 1;
        term = term * x2 / DD::new((k * (k + nu)) as f64);
        sum = sum + term;
        if term.hi.abs() < 1e-34 * sum.hi.abs() {
            break;
        }
    }
    Ok(sum)
}

/// Coefficients `t_k` with `2F1(-n, b; c; z) = sum_k t_k z^k`.
pub fn hyp2f1_terminating_coeffs(n: usize, b: f64, c: f64) -> Result<Vec<f64>> {
    for j in 0..n {
        if (c + j as f64).abs() < 1e-14 {
            return Err(OpucError::PoleInParameter { c });
        }
    }
    let mut t = Vec::with_capacity(n + 1);
    let mut term = 1.0;
    t.push(term);
    for k in 0..n {
        let kf = k as f64;
        term *= (kf - n as f64) * (b + kf) / ((c + kf) * (kf + 1.0));
        t.push(term);
    }
    Ok(t)
}

/// `2F1(-n, b; c; z)` as a finite sum with compensated accumulation.
pub fn hyp2f1_terminating(n: usize, b: f64, c: f64, z: C64) -> Result<C64> {
    let t = hyp2f1_terminating_coeffs(n, b, c)?;
    let mut s = KahanSumC::default();
    let mut zk = C64::new(1.0, 0.0);
    for tk in t {
        s.add(zk * tk);
        zk *= z;
    }
    Ok(s.value())
}

fn check_jacobi(alpha: f64, beta: f64) -> Result<()> {
    if !(alpha > -1.0 && beta > -1.0) {
        return Err(OpucError::Domain(format!(
            "Jacobi parameters ({alpha}, {beta}) must exceed -1"
        )));
    }
    Ok(())
}

fn jacobi_rec(n: usize, alpha: f64, beta: f64) -> (f64, f64, f64, f64) {
    let nf = n as f64;
    let s = 2.0 * nf + alpha + beta;
    let a0 = 2.0 * nf * (nf + alpha + beta) * (s - 2.0);
    let a1 = (s - 1.0) * (alpha * alpha - beta * beta);
    let a2 = (s - 1.0) * s * (s - 2.0);
    let a3 = 2.0 * (nf + alpha - 1.0) * (nf + beta - 1.0) * s;
    (a0, a1, a2, a3)
}

/// Jacobi polynomial `P_n^{(alpha, beta)}(x)` by forward recurrence.
pub fn jacobi_p(n: usize, alpha: f64, beta: f64, x: f64) -> Result<f64> {
    check_jacobi(alpha, beta)?;
    let p0 = 1.0;
    if n == 0 {
        return Ok(p0);
    }
    let mut pm = p0;
    let mut p = (alpha + 1.0) + 0.5 * (alpha + beta + 2.0) * (x - 1.0);
    for k in 2..=n {
        let (a0, a1, a2, a3) = jacobi_rec(k, alpha, beta);
        let next = ((a1 + a2 * x) * p - a3 * pm) / a0;
        pm = p;
        p = next;
    }
    Ok(p)
}

/// Monomial coefficients (ascending in `x`) of `P_n^{(alpha, beta)}`.
pub fn jacobi_p_coeffs(n: usize, alpha: f64, beta: f64) -> Result<Vec<f64>> {
    check_jacobi(alpha, beta)?;
    let p0 = vec![1.0];
    if n == 0 {
        return Ok(p0);
    }
    let mut pm = p0;
    let mut p = vec![
        (alpha + 1.0) - 0.5 * (alpha + beta + 2.0),
        0.5 * (alpha + beta + 2.0),
    ];
    for k in 2..=n {
        let (a0, a1, a2, a3) = jacobi_rec(k, alpha, beta);
        let mut next = vec![0.0; k + 1];
        for (i, &c) in p.iter().enumerate() {
            next[i] += a1 * c;
            next[i + 1] += a2 * c;
        }
        for (i, &c) in pm.iter().enumerate() {
            next[i] -= a3 * c;
        }
        for c in next.iter_mut() {
            *c /= a0;
        }
        pm = p;
        p = next;
    }
    Ok(p)
}

/// Gamma function.
pub fn gamma(x: f64) -> f64 {
    statrs::function::gamma::gamma(x)
}

/// Binomial coefficient as a float.
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pochhammer_examples() {
        assert_eq!(pochhammer(1.0, 3), 6.0);
        assert_eq!(pochhammer(2.5, 0), 1.0);
        let q = QReal::new(0.25).unwrap();
        assert_eq!(q_pochhammer(0.7, q, QLen::Finite(0)), 1.0);
        assert_eq!(q_pochhammer(0.25, q, QLen::Finite(1)), 0.75);
    }

    #[test]
    fn infinite_q_product_matches_euler_pentagonal() {
        // (q;q)_inf = sum_k (-1)^k q^{k(3k-1)/2}
        let q = QReal::new(0.37).unwrap();
        let mut s = 0.0;
        for k in -30i32..=30 {
            let e = (k * (3 * k - 1)) as f64 / 2.0;
            s += if k % 2 == 0 { 1.0 } else { -1.0 } * q.q.powf(e);
        }
        assert!((q_pochhammer(q.q, q, QLen::Infinite) - s).abs() < 1e-15);
    }

    #[test]
    fn bessel_small_values() {
        assert_eq!(bessel_i(0, 0.0).unwrap(), 1.0);
        assert_eq!(bessel_i(1, 0.0).unwrap(), 0.0);
        assert!(bessel_i(0, 51.0).is_err());
        assert_eq!(bessel_i(-3, 1.3).unwrap(), bessel_i(3, 1.3).unwrap());
    }

    #[test]
    fn bessel_i0_one_against_fixed_series() {
        // thirty terms of sum (1/4)^k / (k!)^2, summed from the small end
        let mut terms = Vec::new();
        let mut t = 1.0f64;
        for k in 0..30 {
            if k > 0 {
                t /= 4.0 * (k * k) as f64;
            }
            terms.push(t);
        }
        let oracle: f64 = terms.iter().rev().sum();
        assert!((bessel_i(0, 1.0).unwrap() - oracle).abs() < 1e-16 * oracle);
        assert!((oracle - 1.266_065_877_752_008_4).abs() < 1e-15);
    }

    #[test]
    fn bessel_recurrence() {
        for &t in &[0.5, 1.0, 2.0] {
            for nu in 1..=10i64 {
                let lhs = bessel_i(nu - 1, t).unwrap() - bessel_i(nu + 1, t).unwrap();
                let rhs = 2.0 * nu as f64 / t * bessel_i(nu, t).unwrap();
                assert!((lhs - rhs).abs() < 1e-12 * rhs.abs(), "nu={nu} t={t}");
            }
        }
    }

    #[test]
    fn bessel_dd_agrees() {
        for nu in 0..12 {
            let a = bessel_i(nu, 1.7).unwrap();
            let b = bessel_i_dd(nu, 1.7).unwrap().to_f64();
            assert!((a - b).abs() < 5e-16 * a);
        }
    }

    #[test]
    fn hyp2f1_examples() {
        let z = C64::new(0.3, -0.8);
        assert_eq!(hyp2f1_terminating(0, 2.0, 5.0, z).unwrap(), C64::new(1.0, 0.0));
        let v = hyp2f1_terminating(1, 2.0, -1.0, z).unwrap();
        assert!((v - (1.0 + 2.0 * z)).norm() < 1e-15);
        assert_eq!(hyp2f1_terminating(4, 1.3, 2.2, C64::new(0.0, 0.0)).unwrap(), C64::new(1.0, 0.0));
        assert!(matches!(
            hyp2f1_terminating(3, 1.0, -1.0, z),
            Err(OpucError::PoleInParameter { .. })
        ));
    }

    fn f21(n: usize, b: f64, c: f64, z: C64) -> C64 {
        hyp2f1_terminating(n, b, c, z).unwrap()
    }

    #[test]
    fn hyp2f1_contiguous_relation() {
        // (1-z) d/dz F(-n,a+1;1-n-a;z) = -n F(-n,a+1;1-n-a;z) + n(n+2a)/(n-1+a) F(-(n-1),a+1;2-n-a;z)
        for &a in &[0.5, 1.0, 2.5] {
            for n in 1..=8usize {
                let nf = n as f64;
                let t = hyp2f1_terminating_coeffs(n, a + 1.0, 1.0 - nf - a).unwrap();
                let dp: Vec<f64> = (1..t.len()).map(|k| k as f64 * t[k]).collect();
                for k in 0..16 {
                    let z = C64::from_polar(0.5, 0.4 + k as f64 * 0.39);
                    let d: C64 = dp.iter().rev().fold(C64::new(0.0, 0.0), |acc, &c| acc * z + c);
                    let lhs = (1.0 - z) * d;
                    let rhs = -nf * f21(n, a + 1.0, 1.0 - nf - a, z)
                        + nf * (nf + 2.0 * a) / (nf - 1.0 + a) * f21(n - 1, a + 1.0, 2.0 - nf - a, z);
                    let scale = lhs.norm().max(rhs.norm()).max(1.0);
                    assert!((lhs - rhs).norm() < 1e-11 * scale, "a={a} n={n}");
                }
            }
        }
    }

    fn jacobi_series(n: usize, al: f64, be: f64, x: f64) -> f64 {
        // sum_s C(n+al, n-s) C(n+be, s) ((x-1)/2)^s ((x+1)/2)^(n-s)
        let gbin = |top: f64, k: usize| -> f64 {
            (0..k).fold(1.0, |acc, j| acc * (top - j as f64) / (j + 1) as f64)
        };
        (0..=n)
            .map(|s| {
                gbin(n as f64 + al, n - s)
                    * gbin(n as f64 + be, s)
                    * ((x - 1.0) / 2.0).powi(s as i32)
                    * ((x + 1.0) / 2.0).powi((n - s) as i32)
            })
            .sum()
    }

    #[test]
    fn jacobi_against_series() {
        assert_eq!(jacobi_p(0, 0.3, 1.2, 0.4).unwrap(), 1.0);
        for &(al, be) in &[(0.5, -0.5), (1.0, 0.5), (-0.3, 2.0)] {
            let p1 = jacobi_p(1, al, be, 0.37).unwrap();
            assert!((p1 - ((al + 1.0) + (al + be + 2.0) * (0.37 - 1.0) / 2.0)).abs() < 1e-15);
            for n in 0..10 {
                for &x in &[-0.9, -0.2, 0.37, 0.8, 1.5] {
                    let a = jacobi_p(n, al, be, x).unwrap();
                    let b = jacobi_series(n, al, be, x);
                    assert!((a - b).abs() < 1e-12 * b.abs().max(1.0));
                    let cs = jacobi_p_coeffs(n, al, be).unwrap();
                    let c: f64 = cs.iter().rev().fold(0.0, |acc, &c| acc * x + c);
                    assert!((c - b).abs() < 1e-12 * b.abs().max(1.0));
                }
            }
        }
    }

    #[test]
    fn jacobi_symmetry_and_domain() {
        for n in 0..8 {
            for &x in &[-0.7, 0.1, 0.55] {
                let lhs = jacobi_p(n, 0.4, 1.3, -x).unwrap();
                let rhs = if n % 2 == 0 { 1.0 } else { -1.0 } * jacobi_p(n, 1.3, 0.4, x).unwrap();
                assert!((lhs - rhs).abs() < 1e-13 * rhs.abs().max(1.0));
            }
        }
        assert!(jacobi_p(2, -1.0, 0.0, 0.3).is_err());
    }
}
