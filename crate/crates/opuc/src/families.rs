//! The example weights in closed form: circular Jacobi, Szegő (Jacobi on
//! the circle), modified Bessel and Rogers–Szegő, together with the
//! dynamics of the modified-Bessel reflection coefficients in `t`.

use crate::dd::DD;
use crate::engine::{OpucSystem, Route};
use crate::error::{OpucError, Result};
use crate::ladder::{ExternalField, Ladder, LadderPair, QField, RationalFunction, RationalLadder};
use crate::moments::{system_from_moments, trig_moments_converged, MomentTable};
use crate::poly::{ComplexPoly, QReal, ONE, ZERO};
use crate::report::{Check, VerificationReport};
use crate::special::{bessel_i, bessel_i_dd, hyp2f1_terminating_coeffs, jacobi_p_coeffs, pochhammer, q_poch, QLen};
use crate::weight::WeightSpec;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn factorial(n: usize) -> f64 {
    pochhammer(1.0, n)
}

fn poly(c: &[f64]) -> ComplexPoly {
    ComplexPoly::from_real(c)
}

/// `1 - z^2`
fn one_minus_z2() -> ComplexPoly {
    poly(&[1.0, 0.0, -1.0])
}

// ---------------------------------------------------------------- Lebesgue

pub fn lebesgue_system(n_max: usize) -> Result<OpucSystem> {
    let phi = (0..=n_max).map(|n| ComplexPoly::monomial(n, ONE)).collect();
    OpucSystem::from_polys(phi, WeightSpec::Lebesgue, Route::ClosedForm)
}

// --------------------------------------------------------- circular Jacobi

fn check_cj(a: f64) -> Result<()> {
    WeightSpec::CircularJacobi { a }.validate()
}

/// `phi_n = (a)_n / sqrt(n! (2a+1)_n) 2F1(-n, a+1; 1-n-a; z)`, weight `|1 - z|^{2a}`.
pub fn cj_system(a: f64, n_max: usize) -> Result<OpucSystem> {
    check_cj(a)?;
    if a == 0.0 {
        return lebesgue_system(n_max).map(|s| s.with_weight(WeightSpec::CircularJacobi { a }));
    }
    let mut phi = vec![ComplexPoly::constant(ONE)];
    for n in 1..=n_max {
        let c = hyp2f1_terminating_coeffs(n, a + 1.0, 1.0 - n as f64 - a)?;
        let s = pochhammer(a, n) / (factorial(n) * pochhammer(2.0 * a + 1.0, n)).sqrt();
        let mut cs: Vec<f64> = c.iter().map(|x| x * s).collect();
        cs[n] = cj_kappa(a, n);
        phi.push(poly(&cs));
    }
    OpucSystem::from_polys(phi, WeightSpec::CircularJacobi { a }, Route::ClosedForm)
}

pub fn cj_kappa(a: f64, n: usize) -> f64 {
    pochhammer(a + 1.0, n) / (factorial(n) * pochhammer(2.0 * a + 1.0, n)).sqrt()
}

pub fn cj_reflections(a: f64, n_max: usize) -> Result<Vec<C64>> {
    check_cj(a)?;
    Ok((1..=n_max).map(|n| re(a / (n as f64 + a))).collect())
}

/// `A_n = sqrt(n(n+2a))/(1-z)`, `B_n = n/(1-z)`.
pub fn cj_ladder(a: f64, n: usize) -> Result<LadderPair> {
    check_cj(a)?;
    let nf = n as f64;
    let den = poly(&[1.0, -1.0]);
    Ok(LadderPair::rational(
        n,
        RationalFunction::new(poly(&[(nf * (nf + 2.0 * a)).sqrt()]), den.clone()),
        RationalFunction::new(poly(&[nf]), den),
    ))
}

/// `(P, Q) = ((1-n-a)/z - (2a+1)/(1-z), n(a+1)/(z(1-z)))`.
pub fn cj_ode_pq(a: f64, n: usize, z: C64) -> (C64, C64) {
    let nf = n as f64;
    (
        (1.0 - nf - a) / z - (2.0 * a + 1.0) / (1.0 - z),
        nf * (a + 1.0) / (z * (1.0 - z)),
    )
}

// ------------------------------------------------------------------ Szegő

fn check_sz(a: f64, b: f64) -> Result<()> {
    WeightSpec::Szego { a, b }.validate()
}

/// Coefficients of `phi_{2n}` and `phi_{2n-1}` on the Jacobi basis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SzegoMapCoeffs {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl SzegoMapCoeffs {
    pub fn new(alpha: f64, beta: f64, n: usize) -> Result<Self> {
        check_sz(alpha, beta)?;
        if n == 0 {
            return Err(OpucError::Domain("Szegő map coefficients need n >= 1".into()));
        }
        let (ha, hb) = (pochhammer(alpha + 0.5, n), pochhammer(beta + 0.5, n));
        let s = alpha + beta + 1.0;
        let a = (factorial(n) * pochhammer(s, n) / (ha * hb)).sqrt();
        let c = n as f64 * (factorial(n - 1) * pochhammer(s, n - 1) / (ha * hb)).sqrt();
        Ok(Self {
            a,
            b: a / 2.0,
            c,
            d: (n as f64 + alpha + beta) / (2.0 * n as f64) * c,
        })
    }
}

/// `z^n p((z + 1/z)/2)` for `deg p <= n`, as a polynomial of degree `2n`.
fn joukowski_lift(px: &[f64], n: usize) -> ComplexPoly {
    let half = poly(&[0.5, 0.0, 0.5]);
    let mut out = ComplexPoly::zero().padded(2 * n);
    let mut pw = ComplexPoly::constant(ONE);
    for (k, &ck) in px.iter().enumerate() {
        let term = pw.shift(n - k).scale_real(ck);
        out = &out + &term.padded(2 * n);
        pw = &pw * &half;
    }
    out
}

/// `z^n P_n^{(a-1/2,b-1/2)}(x)` and `(1/2)(z^2-1) z^{n-1} P_{n-1}^{(a+1/2,b+1/2)}(x)`.
fn sz_parts(a: f64, b: f64, n: usize) -> Result<(ComplexPoly, ComplexPoly)> {
    let p1 = joukowski_lift(&jacobi_p_coeffs(n, a - 0.5, b - 0.5)?, n);
    let q = joukowski_lift(&jacobi_p_coeffs(n - 1, a + 0.5, b + 0.5)?, n - 1);
    let p2 = (&q * &poly(&[-0.5, 0.0, 0.5])).padded(2 * n);
    Ok((p1, p2))
}

pub fn sz_phi(a: f64, b: f64, m: usize) -> Result<ComplexPoly> {
    check_sz(a, b)?;
    if m == 0 {
        return Ok(ComplexPoly::constant(ONE));
    }
    let n = m.div_ceil(2);
    let k = SzegoMapCoeffs::new(a, b, n)?;
    let (p1, p2) = sz_parts(a, b, n)?;
    let mut cs = if m.is_multiple_of(2) {
        (&p1.scale_real(k.a) + &p2.scale_real(k.b)).into_coeffs()
    } else {
        let t = (&p1.scale_real(k.c) + &p2.scale_real(k.d)).into_coeffs();
        t[1..].to_vec()
    };
    cs[m] = re(sz_kappa(a, b, m));
    Ok(ComplexPoly::new(cs))
}

/// Weight `|1 - z|^{2a} |1 + z|^{2b}`.
pub fn sz_system(a: f64, b: f64, n_max: usize) -> Result<OpucSystem> {
    let phi = (0..=n_max).map(|m| sz_phi(a, b, m)).collect::<Result<Vec<_>>>()?;
    OpucSystem::from_polys(phi, WeightSpec::Szego { a, b }, Route::ClosedForm)
}

pub fn sz_kappa(a: f64, b: f64, m: usize) -> f64 {
    if m == 0 {
        return 1.0;
    }
    let s = a + b + 1.0;
    let n = m.div_ceil(2);
    let (ha, hb) = (pochhammer(a + 0.5, n), pochhammer(b + 0.5, n));
    if m.is_multiple_of(2) {
        0.5f64.powi(2 * n as i32) * pochhammer(s, 2 * n)
            / (factorial(n) * pochhammer(s, n) * ha * hb).sqrt()
    } else {
        0.5f64.powi(2 * n as i32 - 1) * pochhammer(s, 2 * n - 1)
            / (factorial(n - 1) * pochhammer(s, n - 1) * ha * hb).sqrt()
    }
}

pub fn sz_reflection(a: f64, b: f64, m: usize) -> f64 {
    let mf = m as f64;
    if m.is_multiple_of(2) {
        (a + b) / (mf + a + b)
    } else {
        (a - b) / (mf + a + b)
    }
}

pub fn sz_phi0(a: f64, b: f64, m: usize) -> f64 {
    if m == 0 {
        1.0
    } else {
        sz_reflection(a, b, m) * sz_kappa(a, b, m)
    }
}

/// Subleading coefficient `l_m`.
pub fn sz_ell(a: f64, b: f64, m: usize) -> f64 {
    let mf = m as f64;
    mf * (a - b) / (mf + a + b) * sz_kappa(a, b, m)
}

pub fn sz_reflections(a: f64, b: f64, n_max: usize) -> Result<Vec<C64>> {
    check_sz(a, b)?;
    Ok((1..=n_max).map(|m| re(sz_reflection(a, b, m))).collect())
}

/// Closed-form ladder pair for index `m`; odd indices need `a != b`,
/// even ones `a + b != 0`.
pub fn sz_ladder(a: f64, b: f64, m: usize) -> Result<LadderPair> {
    check_sz(a, b)?;
    if m == 0 {
        return Ok(LadderPair::zero(0, crate::ladder::LadderKind::ClosedForm));
    }
    let n = m.div_ceil(2) as f64;
    let den = |c: f64| one_minus_z2().scale_real(c);
    if m % 2 == 1 {
        if a == b {
            return Err(OpucError::DegenerateParameters(format!(
                "odd-index Szegő ladder needs a != b (a = b = {a})"
            )));
        }
        let ca = 2.0 * ((n + a - 0.5) * (n + b - 0.5)).sqrt();
        let k = 2.0 * n - 1.0;
        Ok(LadderPair::rational(
            m,
            RationalFunction::new(poly(&[ca * (a - b), ca * (a + b)]), den(a - b)),
            RationalFunction::new(poly(&[4.0 * a * b + k * (a + b), k * (a - b)]), den(a - b)),
        ))
    } else {
        if a + b == 0.0 {
            return Err(OpucError::DegenerateParameters("even-index Szegő ladder needs a + b != 0".into()));
        }
        let ca = 2.0 * (n * (n + a + b)).sqrt();
        Ok(LadderPair::rational(
            m,
            RationalFunction::new(poly(&[ca * (a + b), ca * (a - b)]), den(a + b)),
            RationalFunction::new(poly(&[2.0 * n * (a - b), 2.0 * n * (a + b)]), den(a + b)),
        ))
    }
}

/// Closed-form `(P, Q)` of the second-order equation for `phi_m`.
pub fn sz_ode_pq(a: f64, b: f64, m: usize, z: C64) -> (C64, C64) {
    let mf = m as f64;
    let base = -(mf + a + b - 1.0) / z - (2.0 * a + 1.0) / (1.0 - z) + (2.0 * b + 1.0) / (1.0 + z);
    let zz = z * (1.0 - z * z);
    let (pa, pb) = ((1.0 + z) * (1.0 + z), (1.0 - z) * (1.0 - z));
    if m.is_multiple_of(2) {
        let lin = a + b + (a - b) * z;
        (
            base - (a - b) / lin,
            mf * (a * (a + 1.0) * pa - b * (b + 1.0) * pb) / (zz * lin),
        )
    } else {
        let lin = a - b + (a + b) * z;
        let q = (mf * (a * (a + 1.0) * pa + b * (b + 1.0) * pb - 2.0 * a * b * (1.0 - z * z)) + 4.0 * a * b)
            / (zz * lin);
        (base - (a + b) / lin, q)
    }
}

// ---------------------------------------------------------- modified Bessel

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ReflectionRoute {
    ToeplitzDet,
    DPII,
    ODE,
}

/// `r_0 = 1, r_1, ..., r_N` for the weight `exp(t cos theta)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReflectionSequence {
    pub t: f64,
    pub r: Vec<f64>,
    pub route: ReflectionRoute,
}

impl ReflectionSequence {
    pub fn n_max(&self) -> usize {
        self.r.len() - 1
    }
}

fn mb_weight(t: f64) -> Result<WeightSpec> {
    let w = WeightSpec::ModifiedBessel { t };
    w.validate()?;
    Ok(w)
}

/// System from the exact moments `c_j = I_j(t)/I_0(t)` (Toeplitz route).
pub fn mb_system_toeplitz(t: f64, n_max: usize) -> Result<(OpucSystem, ReflectionSequence)> {
    let w = mb_weight(t)?;
    let i0 = bessel_i(0, t)?;
    let c = (0..=n_max)
        .map(|j| Ok(re(bessel_i(j as i64, t)? / i0)))
        .collect::<Result<Vec<_>>>()?;
    let sys = system_from_moments(&MomentTable::from_nonneg(&c, 0), n_max, w)?.with_route(Route::ClosedForm);
    let r = (0..=n_max).map(|n| sys.reflection(n).re).collect();
    Ok((sys, ReflectionSequence { t, r, route: ReflectionRoute::ToeplitzDet }))
}

/// `kappa_n^2 = I_0 det(I_{j-k})_{n} / det(I_{j-k})_{n+1}` with `k x k` determinants.
pub fn mb_kappa2_toeplitz(t: f64, n: usize) -> Result<f64> {
    let i0 = bessel_i(0, t)?;
    let c = (0..=n)
        .map(|j| Ok(re(bessel_i(j as i64, t)?)))
        .collect::<Result<Vec<_>>>()?;
    let m = MomentTable::from_nonneg(&c, 0);
    let dn = crate::moments::toeplitz_det(&m, n)?;
    let dn1 = crate::moments::toeplitz_det(&m, n + 1)?;
    let v = dn.div(dn1).to_complex().ok_or(OpucError::NumericalBreakdown {
        step: n,
        reason: "determinant ratio out of range".into(),
    })?;
    Ok(i0 * v.re)
}

/// `(r_1, r_2, kappa_1^2, kappa_2^2)` from Bessel functions directly.
pub fn mb_first_members(t: f64) -> Result<(f64, f64, f64, f64)> {
    let (i0, i1, i2) = (bessel_i(0, t)?, bessel_i(1, t)?, bessel_i(2, t)?);
    Ok((
        -i1 / i0,
        (i0 * i2 - i1 * i1) / (i1 * i1 - i0 * i0),
        i0 * i0 / (i0 * i0 - i1 * i1),
        i0 * (i0 * i0 - i1 * i1) / ((i0 - i2) * (i0 * (i0 + i2) - 2.0 * i1 * i1)),
    ))
}

fn dpii_step_guard(n: usize, r: f64) -> Result<()> {
    if (1.0 - r * r).abs() <= 1e-12 {
        return Err(OpucError::NumericalBreakdown {
            step: n,
            reason: format!("1 - r_{n}^2 = {} below guard", 1.0 - r * r),
        });
    }
    Ok(())
}

/// `r_0 ... r_N` from `r_{n+1} = -(2n/t) r_n/(1 - r_n^2) - r_{n-1}`, seeded with
/// `r_0 = 1`, `r_1 = -I_1/I_0`, carried in double-double precision.
pub fn mb_dpii(t: f64, n_max: usize) -> Result<ReflectionSequence> {
    mb_weight(t)?;
    if t == 0.0 {
        return Err(OpucError::Domain("the dP-II recurrence needs t != 0".into()));
    }
    let mut r = vec![DD::ONE];
    if n_max >= 1 {
        r.push(-(bessel_i_dd(1, t)? / bessel_i_dd(0, t)?));
    }
    let td = DD::new(t);
    for n in 1..n_max {
        let rn = r[n];
        dpii_step_guard(n, rn.to_f64())?;
        let next = -(DD::new(2.0 * n as f64) / td) * rn / (DD::ONE - rn * rn) - r[n - 1];
        r.push(next);
    }
    Ok(ReflectionSequence {
        t,
        r: r.into_iter().map(DD::to_f64).collect(),
        route: ReflectionRoute::DPII,
    })
}

/// Extend to `r_0 ... r_N` by the dP-II recurrence (regenerated from the seeds).
pub fn mb_dpii_extend(seq: &ReflectionSequence, n_max: usize) -> Result<ReflectionSequence> {
    mb_dpii(seq.t, n_max.max(seq.n_max()))
}

/// Continue the recurrence from the last two entries of `seq` in binary64.
pub fn mb_dpii_extend_f64(seq: &ReflectionSequence, n_max: usize) -> Result<ReflectionSequence> {
    let t = seq.t;
    if t == 0.0 {
        return Err(OpucError::Domain("the dP-II recurrence needs t != 0".into()));
    }
    let mut r = seq.r.clone();
    if r.len() < 2 {
        r = vec![1.0, -bessel_i(1, t)? / bessel_i(0, t)?];
    }
    while r.len() <= n_max {
        let n = r.len() - 1;
        let rn = r[n];
        dpii_step_guard(n, rn)?;
        r.push(-(2.0 * n as f64 / t) * rn / (1.0 - rn * rn) - r[n - 1]);
    }
    Ok(ReflectionSequence { t, r, route: ReflectionRoute::DPII })
}

/// Residual `max_n |(2n/t) r_n/(1 - r_n^2) + r_{n+1} + r_{n-1}|` for `1 <= n < N`.
pub fn mb_dpii_residual(seq: &ReflectionSequence) -> f64 {
    let r = &seq.r;
    (1..seq.n_max())
        .map(|n| (2.0 * n as f64 / seq.t * r[n] / (1.0 - r[n] * r[n]) + r[n + 1] + r[n - 1]).abs())
        .fold(0.0, f64::max)
}

/// Szegő-recurrence system from the double-double dP-II reflections.
pub fn mb_system_dpii(t: f64, n_max: usize) -> Result<OpucSystem> {
    let seq = mb_dpii(t, n_max)?;
    let r: Vec<C64> = seq.r[1..].iter().map(|&x| re(x)).collect();
    Ok(OpucSystem::build_from_reflections(&r)?.with_weight(mb_weight(t)?))
}

/// Closed-form ladder for index `n` (needs `phi_{n+1}`):
/// `A_n = (k_{n-1}/k_n)[n + t/(2z) + (t/2)(k_{n-1}/k_n)(phi_{n-1}(0)/phi_n(0))
///        - (t/2) conj(phi_{n+1}(0)) phi_n(0)/(k_{n+1} k_n)]`,
/// `B_n = (t/(2z))(k_{n-1}/k_n)(phi_{n-1}(0)/phi_n(0))`.
pub fn mb_ladder(sys: &OpucSystem, t: f64, n: usize) -> Result<LadderPair> {
    if n == 0 {
        return Ok(LadderPair::zero(0, crate::ladder::LadderKind::ClosedForm));
    }
    if n + 1 > sys.n_max() {
        return Err(OpucError::Domain(format!(
            "modified-Bessel ladder at n = {n} needs phi_{}",
            n + 1
        )));
    }
    let p0 = sys.nonzero_phi0(n)?;
    let (kp, kn, km) = (sys.kappa(n + 1), sys.kappa(n), sys.kappa(n - 1));
    let g = km / kn;
    let c0 = g * (n as f64 + 0.5 * t * g * sys.phi0(n - 1) / p0 - 0.5 * t * sys.phi0(n + 1).conj() * p0 / (kp * kn));
    let c1 = re(g * 0.5 * t);
    let zpoly = poly(&[0.0, 1.0]);
    Ok(LadderPair::rational(
        n,
        RationalFunction::new(ComplexPoly::new(vec![c1, c0]), zpoly.clone()),
        RationalFunction::new(ComplexPoly::constant(0.5 * t * g * sys.phi0(n - 1) / p0), zpoly),
    ))
}

/// Residual of `t/2 = -(n-1)(k_n/k_{n-1})(phi_{n-1}(0)/phi_n(0))
///  - (t/2)(k_n k_{n-2}/k_{n-1}^2)(phi_{n-2}(0)/phi_n(0)) + (t/2) phi_{n-1}(0)^2/k_{n-1}^2`.
pub fn mb_reduction_residual(sys: &OpucSystem, t: f64, n: usize) -> Result<f64> {
    if n < 2 || n > sys.n_max() {
        return Err(OpucError::Domain(format!("reduction needs 2 <= n <= {}", sys.n_max())));
    }
    let p0 = sys.nonzero_phi0(n)?;
    let (kn, km, kmm) = (sys.kappa(n), sys.kappa(n - 1), sys.kappa(n - 2));
    let terms = [
        -(n as f64 - 1.0) * kn / km * sys.phi0(n - 1) / p0,
        -0.5 * t * kn * kmm / (km * km) * sys.phi0(n - 2) / p0,
        0.5 * t * sys.phi0(n - 1) * sys.phi0(n - 1) / (km * km),
        re(-0.5 * t),
    ];
    let scale = terms.iter().map(|x| x.norm()).fold(0.0, f64::max);
    Ok(terms.iter().sum::<C64>().norm() / scale)
}

/// `z_n = (r_n + 1)/(r_n - 1)`.
pub fn mb_xfm(r: f64) -> f64 {
    (r + 1.0) / (r - 1.0)
}

/// Inverse of [`mb_xfm`]: `r = (z + 1)/(z - 1)`.
pub fn mb_xfm_inv(z: f64) -> f64 {
    (z + 1.0) / (z - 1.0)
}

/// Central-difference checks of the `t`-dynamics of the coefficients.
pub fn mb_coefficient_odes(seq: &ReflectionSequence, sys: &OpucSystem, t: f64) -> Result<VerificationReport> {
    const H: f64 = 1e-4;
    let n_max = sys.n_max();
    if n_max < 2 || seq.r.len() < n_max + 1 {
        return Err(OpucError::Domain("coefficient dynamics need N >= 2".into()));
    }
    let (sp, _) = mb_system_toeplitz(t + H, n_max)?;
    let (sm, _) = mb_system_toeplitz(t - H, n_max)?;
    let rr = bessel_i(1, t)? / bessel_i(0, t)?;
    let zs = crate::ladder::default_samples();
    let r = &seq.r;
    let mut rep = VerificationReport::new("coefficient-dynamics", "bessel-coefficient-odes", "mb").param("t", t);
    let rel = |ts: &[f64]| {
        let s: f64 = ts.iter().sum();
        let sc = ts.iter().map(|x| x.abs()).fold(0.0, f64::max);
        if sc == 0.0 { s.abs() } else { s.abs() / sc }
    };
    let top = (n_max - 1).min(5);
    for n in 1..=top {
        let kn = sys.kappa(n);
        let p0 = sys.nonzero_phi0(n)?.re;
        let dk = (sp.kappa(n) - sm.kappa(n)) / (2.0 * H);
        let dp = (sp.phi0(n).re - sm.phi0(n).re) / (2.0 * H);
        let dr = (sp.reflection(n).re - sm.reflection(n).re) / (2.0 * H);
        let ratio = r[n + 1] * kn / p0;
        rep.push(Check::new(format!("kappa-dt n={n}"), rel(&[2.0 / kn * dk, -rr, -r[n + 1] * r[n]]), 1e-6));
        rep.push(Check::new(
            format!("phi0-dt n={n}"),
            rel(&[2.0 / p0 * dp, -rr, -ratio, sys.phi0(n - 1).re / p0 * sys.kappa(n - 1) / kn]),
            1e-6,
        ));
        rep.push(Check::new(
            format!("reflection-dt n={n}"),
            rel(&[r[n + 1], -r[n - 1], -2.0 / (1.0 - r[n] * r[n]) * dr]),
            1e-6,
        ));
        let mut worst: f64 = 0.0;
        for &z in &zs {
            let dphi = (sp.phi(n).eval(z) - sm.phi(n).eval(z)) / (2.0 * H);
            let t1 = (rr + ratio) * sys.phi(n).eval(z);
            let t2 = -(sys.kappa(n - 1) / kn) * (1.0 + ratio * z) * sys.phi(n - 1).eval(z);
            let terms = [2.0 * dphi, -t1, -t2];
            let sc = terms.iter().map(|x| x.norm()).fold(0.0, f64::max);
            worst = worst.max(terms.iter().sum::<C64>().norm() / sc);
        }
        rep.push(Check::new(format!("phi-dt n={n}"), worst, 1e-6));
        let pair = mb_ladder(sys, t, n)?;
        rep.push(Check::new(
            format!("z-lowering n={n}"),
            crate::ladder::lowering_residual(sys, &pair, &zs)?,
            1e-6,
        ));
    }
    Ok(rep)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RnOdeSolution {
    pub n: usize,
    pub t_end: f64,
    pub steps: usize,
    /// `r_n(t_end)`
    pub r: f64,
    pub r_prime: f64,
    /// `kappa_n^2(t_end)` from the `t`-integral of `r_n^2/(s(1 - r_n^2))`.
    pub kappa2_quad: f64,
}

/// Seed point of the `r_n` equation.
pub const RN_T0: f64 = 1e-2;

/// Integrate
/// `r'' = (1/2)(1/(r+1) + 1/(r-1)) r'^2 - r'/t - r(1 - r^2) + (n^2/t^2) r/(1 - r^2)`
/// by classical RK4 from `t_0 = 0.01` with the small-`t` series seed.
pub fn mb_rn_ode_integrate(n: usize, t_end: f64, h: f64) -> Result<RnOdeSolution> {
    if n == 0 {
        return Err(OpucError::Domain("r_n equation needs n >= 1".into()));
    }
    if !(t_end > RN_T0 && t_end <= 5.0) {
        return Err(OpucError::Domain(format!("t_end = {t_end} outside ({RN_T0}, 5]")));
    }
    if !(h > 0.0 && h <= 1e-3) {
        return Err(OpucError::Domain(format!("step h = {h} must lie in (0, 1e-3]")));
    }
    let nf = n as f64;
    let c = (-0.5f64).powi(n as i32) / factorial(n);
    let t0 = RN_T0;
    let mut y = [
        c * t0.powi(n as i32) * (1.0 - t0 * t0 / (4.0 * (nf + 1.0))),
        c * (nf * t0.powi(n as i32 - 1) - (nf + 2.0) * t0.powi(n as i32 + 1) / (4.0 * (nf + 1.0))),
    ];
    let f = |t: f64, y: [f64; 2]| -> Result<[f64; 2]> {
        let (r, p) = (y[0], y[1]);
        let g = 1.0 - r * r;
        if g.abs() < 1e-10 {
            return Err(OpucError::SingularityApproached { t });
        }
        Ok([
            p,
            0.5 * (1.0 / (r + 1.0) + 1.0 / (r - 1.0)) * p * p - p / t - r * g + nf * nf / (t * t) * r / g,
        ])
    };
    let mut steps = ((t_end - t0) / h).ceil() as usize;
    steps += steps % 2;
    let hh = (t_end - t0) / steps as f64;
    let integrand = |t: f64, r: f64| r * r / (t * (1.0 - r * r));
    let mut simpson = crate::special::KahanSum::default();
    simpson.add(integrand(t0, y[0]));
    for i in 0..steps {
        let t = t0 + i as f64 * hh;
        let k1 = f(t, y)?;
        let k2 = f(t + hh / 2.0, [y[0] + hh / 2.0 * k1[0], y[1] + hh / 2.0 * k1[1]])?;
        let k3 = f(t + hh / 2.0, [y[0] + hh / 2.0 * k2[0], y[1] + hh / 2.0 * k2[1]])?;
        let k4 = f(t + hh, [y[0] + hh * k3[0], y[1] + hh * k3[1]])?;
        for j in 0..2 {
            y[j] += hh / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
        let tn = t0 + (i + 1) as f64 * hh;
        let w = if i + 1 == steps {
            1.0
        } else if (i + 1) % 2 == 1 {
            4.0
        } else {
            2.0
        };
        simpson.add(w * integrand(tn, y[0]));
    }
    let head = c * c * t0.powi(2 * n as i32) / (2.0 * nf);
    let integral = head + simpson.value() * hh / 3.0;
    let r = y[0];
    let kappa2_quad = bessel_i(0, t_end)? / (1.0 - r * r).sqrt() * (-nf * integral).exp();
    Ok(RnOdeSolution { n, t_end, steps, r, r_prime: y[1], kappa2_quad })
}

// ------------------------------------------------------------ Rogers–Szegő

/// `H_n(z|q) = sum_k (q;q)_n q^{-k/2} z^k / ((q;q)_k (q;q)_{n-k})`.
pub fn rs_h(q: QReal, n: usize) -> ComplexPoly {
    let qp = |k: usize| q_poch(q.q, q.q, QLen::Finite(k));
    let cs: Vec<f64> = (0..=n)
        .map(|k| qp(n) * q.q.powf(-(k as f64) / 2.0) / (qp(k) * qp(n - k)))
        .collect();
    poly(&cs)
}

/// `phi_n = q^{n/2} / sqrt((q;q)_n) H_n(z|q)`.
pub fn rs_system(q: QReal, n_max: usize) -> Result<OpucSystem> {
    let phi = (0..=n_max)
        .map(|n| {
            let s = q.q.powf(n as f64 / 2.0) / q_poch(q.q, q.q, QLen::Finite(n)).sqrt();
            let mut cs = rs_h(q, n).scale_real(s).into_coeffs();
            cs[n] = re(1.0 / q_poch(q.q, q.q, QLen::Finite(n)).sqrt());
            ComplexPoly::new(cs)
        })
        .collect();
    OpucSystem::from_polys(phi, WeightSpec::RogersSzego { q: q.q }, Route::ClosedForm)
}

pub fn rs_reflections(q: QReal, n_max: usize) -> Vec<C64> {
    (1..=n_max).map(|n| re(q.q.powf(n as f64 / 2.0))).collect()
}

/// `D_q phi_n = (sqrt(1 - q^n)/(1 - q)) phi_{n-1}`: constant `A_n`, `B_n = 0`.
pub fn rs_ladder(q: QReal, n: usize) -> LadderPair {
    if n == 0 {
        return LadderPair::zero(0, crate::ladder::LadderKind::ClosedForm);
    }
    let a = (1.0 - q.q.powi(n as i32)).sqrt() / (1.0 - q.q);
    LadderPair::rational(n, RationalFunction::constant(re(a)), RationalFunction::constant(ZERO))
}

/// `u(z) = sqrt(q)/(1-q) + q/((1-q) z)`.
#[derive(Debug, Clone, Copy)]
pub struct RsField {
    pub q: QReal,
}

impl QField for RsField {
    fn q(&self) -> QReal {
        self.q
    }
    fn u(&self, z: C64) -> C64 {
        let q = self.q.q;
        self.q.sqrt_q / (1.0 - q) + q / ((1.0 - q) * z)
    }
    fn q_divided_difference(&self, z: C64, zeta: C64) -> C64 {
        -1.0 / ((1.0 - self.q.q) * zeta * z)
    }
}

// ------------------------------------------------------------------ fields

/// External fields of the classical examples, continued analytically off the circle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Field {
    /// `exp(-v) = z^{-a} (1-z)^a (z-1)^a`
    CircularJacobi { a: f64 },
    /// `exp(-v) = z^{-a-b} (1-z)^a (z-1)^a (1+z)^{2b}`
    Szego { a: f64, b: f64 },
    /// `v = -(t/2)(z + 1/z)`
    ModifiedBessel { t: f64 },
}

impl Field {
    pub fn for_weight(w: &WeightSpec) -> Result<Self> {
        match *w {
            WeightSpec::CircularJacobi { a } => Ok(Field::CircularJacobi { a }),
            WeightSpec::Szego { a, b } => Ok(Field::Szego { a, b }),
            WeightSpec::ModifiedBessel { t } => Ok(Field::ModifiedBessel { t }),
            _ => Err(OpucError::Domain(format!("no classical external field for weight '{}'", w.name()))),
        }
    }
}

impl ExternalField for Field {
    fn neg_v(&self, z: C64) -> C64 {
        let one = ONE;
        match *self {
            Field::CircularJacobi { a } => a * (-z.ln() + (one - z).ln() + (z - one).ln()),
            Field::Szego { a, b } => {
                -(a + b) * z.ln() + a * ((one - z).ln() + (z - one).ln()) + 2.0 * b * (one + z).ln()
            }
            Field::ModifiedBessel { t } => 0.5 * t * (z + one / z),
        }
    }

    fn vprime(&self, z: C64) -> C64 {
        match *self {
            Field::CircularJacobi { a } => a / z + 2.0 * a / (1.0 - z),
            Field::Szego { a, b } => (a + b) / z + 2.0 * a / (1.0 - z) - 2.0 * b / (1.0 + z),
            Field::ModifiedBessel { t } => -0.5 * t * (1.0 - 1.0 / (z * z)),
        }
    }

    fn divided_difference(&self, z: C64, zeta: C64) -> C64 {
        match *self {
            Field::CircularJacobi { a } => -a / (z * zeta) + 2.0 * a / ((1.0 - z) * (1.0 - zeta)),
            Field::Szego { a, b } => {
                -(a + b) / (z * zeta) + 2.0 * a / ((1.0 - z) * (1.0 - zeta)) + 2.0 * b / ((1.0 + z) * (1.0 + zeta))
            }
            Field::ModifiedBessel { t } => -0.5 * t * (1.0 / (z * zeta * zeta) + 1.0 / (z * z * zeta)),
        }
    }
}

// ---------------------------------------------------------------- dispatch

/// Closed-form system for any weight with a known construction.
pub fn closed_form_system(w: &WeightSpec, n_max: usize) -> Result<OpucSystem> {
    w.validate()?;
    match *w {
        WeightSpec::Lebesgue => lebesgue_system(n_max),
        WeightSpec::CircularJacobi { a } => cj_system(a, n_max),
        WeightSpec::Szego { a, b } => sz_system(a, b, n_max),
        WeightSpec::ModifiedBessel { t } => Ok(mb_system_toeplitz(t, n_max)?.0),
        WeightSpec::RogersSzego { q } => rs_system(QReal::new(q)?, n_max),
        WeightSpec::CustomMoments { .. } => {
            let m = crate::moments::trig_moments(w, n_max, 0)?;
            Ok(system_from_moments(&m, n_max, w.clone())?.with_route(Route::ClosedForm))
        }
        WeightSpec::Unspecified => Err(OpucError::Domain("unspecified weight has no closed form".into())),
    }
}

/// Reflection coefficients `r_1 ... r_N` known independently of any polynomial construction.
pub fn reflections(w: &WeightSpec, n_max: usize) -> Result<Vec<C64>> {
    w.validate()?;
    match *w {
        WeightSpec::Lebesgue => Ok(vec![ZERO; n_max]),
        WeightSpec::CircularJacobi { a } => cj_reflections(a, n_max),
        WeightSpec::Szego { a, b } => sz_reflections(a, b, n_max),
        WeightSpec::ModifiedBessel { t } => {
            if t == 0.0 {
                return Ok(vec![ZERO; n_max]);
            }
            Ok(mb_dpii(t, n_max)?.r[1..].iter().map(|&x| re(x)).collect())
        }
        WeightSpec::RogersSzego { q } => Ok(rs_reflections(QReal::new(q)?, n_max)),
        _ => Err(OpucError::Domain(format!("no reflection data for weight '{}'", w.name()))),
    }
}

/// System for `w` by the requested route.
pub fn build_system(w: &WeightSpec, n_max: usize, route: Route) -> Result<OpucSystem> {
    match route {
        Route::ClosedForm => closed_form_system(w, n_max),
        Route::SzegoRecurrence => Ok(OpucSystem::build_from_reflections(&reflections(w, n_max)?)?.with_weight(w.clone())),
        Route::Moments => {
            let m = trig_moments_converged(w, n_max)?;
            system_from_moments(&m, n_max, w.clone())
        }
    }
}

/// The most accurate system available for `w`: the dP-II route for the
/// modified Bessel weight, closed forms otherwise.
pub fn reference_system(w: &WeightSpec, n_max: usize) -> Result<OpucSystem> {
    match *w {
        WeightSpec::ModifiedBessel { t } if t != 0.0 => mb_system_dpii(t, n_max),
        _ => closed_form_system(w, n_max),
    }
}

/// Closed-form `d/dz` ladder for `w`, using `sys` where the coefficients depend on it.
pub fn closed_ladder<'a>(w: &WeightSpec, sys: &'a OpucSystem) -> Result<Box<dyn Ladder + 'a>> {
    match *w {
        WeightSpec::CircularJacobi { a } => Ok(Box::new(RationalLadder { make: move |n| cj_ladder(a, n) })),
        WeightSpec::Szego { a, b } => Ok(Box::new(RationalLadder { make: move |n| sz_ladder(a, b, n) })),
        WeightSpec::ModifiedBessel { t } => Ok(Box::new(RationalLadder { make: move |n| mb_ladder(sys, t, n) })),
        _ => Err(OpucError::NoLadderForOperator(format!(
            "no closed-form d/dz ladder for weight '{}'",
            w.name()
        ))),
    }
}

/// Closed-form `D_q` ladder for the Rogers–Szegő weight.
pub fn closed_q_ladder(w: &WeightSpec) -> Result<Box<dyn Ladder>> {
    match *w {
        WeightSpec::RogersSzego { q } => {
            let q = QReal::new(q)?;
            Ok(Box::new(RationalLadder { make: move |n| Ok(rs_ladder(q, n)) }))
        }
        _ => Err(OpucError::NoLadderForOperator(format!(
            "no closed-form D_q ladder for weight '{}'",
            w.name()
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::coeff_residual;

    #[test]
    fn cj_first_member() {
        let s = cj_system(1.0, 3).unwrap();
        let r3 = 3f64.sqrt();
        assert!((s.phi(1).coeff(0) - re(1.0 / r3)).norm() < 1e-15);
        assert!((s.kappa(1) - 2.0 / r3).abs() < 1e-15);
        assert!((s.reflection(1).re - 0.5).abs() < 1e-15);
    }

    #[test]
    fn cj_zero_is_lebesgue() {
        let s = cj_system(0.0, 4).unwrap();
        assert_eq!(s.phi(4), &ComplexPoly::monomial(4, ONE));
        assert!(cj_system(-0.5, 2).is_err());
    }

    #[test]
    fn sz_map_coefficient_relations() {
        for &(a, b, n) in &[(1.0, 0.5, 3), (0.3, 1.7, 1), (2.0, 2.0, 5)] {
            let k = SzegoMapCoeffs::new(a, b, n).unwrap();
            assert!((k.b - k.a / 2.0).abs() <= 1e-14 * k.a);
            assert!((k.d - (n as f64 + a + b) / (2.0 * n as f64) * k.c).abs() <= 1e-14 * k.c);
        }
    }

    #[test]
    fn sz_symmetric_odd_is_shift_of_even() {
        for &a in &[0.5, 1.25] {
            let s = sz_system(a, a, 9).unwrap();
            for n in 1..=4 {
                let d = coeff_residual(&[s.phi(2 * n - 1).clone(), -&s.phi(2 * n - 2).shift(1)]);
                assert!(d < 1e-14, "a={a} n={n} d={d}");
            }
        }
    }

    #[test]
    fn sz_ladder_degenerate_branch() {
        assert!(matches!(sz_ladder(1.0, 1.0, 3), Err(OpucError::DegenerateParameters(_))));
        assert!(sz_ladder(1.0, 1.0, 4).is_ok());
    }

    #[test]
    fn rs_small_values() {
        let q = QReal::new(0.25).unwrap();
        let s = rs_system(q, 2).unwrap();
        assert!((s.phi0(1).re - 1.0 / 3f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn xfm_roundtrip() {
        for &r in &[-0.9, -0.1, 0.0, 0.3, 0.75] {
            assert!((mb_xfm_inv(mb_xfm(r)) - r).abs() < 1e-14);
        }
    }

    #[test]
    fn dd_dpii_beats_binary64() {
        let t = 0.5;
        let (_, toe) = mb_system_toeplitz(t, 10).unwrap();
        let dd = mb_dpii(t, 10).unwrap();
        let seed = ReflectionSequence { t, r: dd.r[..2].to_vec(), route: ReflectionRoute::DPII };
        let plain = mb_dpii_extend_f64(&seed, 10).unwrap();
        let e_dd = (0..=10).map(|n| (dd.r[n] - toe.r[n]).abs()).fold(0.0, f64::max);
        let e_plain = (plain.r[10] - toe.r[10]).abs();
        assert!(e_dd < 1e-12, "{e_dd}");
        assert!(e_plain > 1e-8, "{e_plain}");
    }
}
