//! Ladder coefficients `A_n`, `B_n` in `T phi_n = A_n phi_{n-1} - B_n phi_n`
//! for `T = d/dz` and `T = D_q`, the operators built from them, the
//! second-order equations they imply, and the functional equations
//! relating neighbouring indices.

use crate::engine::OpucSystem;
use crate::error::{OpucError, Result};
use crate::exec::Exec;
use crate::moments::{default_grid, QuadRule};
use crate::poly::{q_number, ComplexPoly, QReal, ZERO};
use crate::special::KahanSumC;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

/// Step for central differences of sampled coefficients.
pub const DIFF_STEP: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RationalFunction {
    pub num: ComplexPoly,
    pub den: ComplexPoly,
}

impl RationalFunction {
    pub fn new(num: ComplexPoly, den: ComplexPoly) -> Self {
        Self { num, den }
    }

    pub fn constant(c: C64) -> Self {
        Self::new(ComplexPoly::constant(c), ComplexPoly::constant(C64::new(1.0, 0.0)))
    }

    pub fn eval(&self, z: C64) -> Result<C64> {
        let d = self.den.eval(z);
        if d.norm() < 1e-300 {
            return Err(OpucError::Domain(format!("rational function has a pole at {z}")));
        }
        Ok(self.num.eval(z) / d)
    }

    /// Value and first derivative.
    pub fn eval_d1(&self, z: C64) -> Result<(C64, C64)> {
        let (n, n1, _) = self.num.eval_d2(z);
        let (d, d1, _) = self.den.eval_d2(z);
        if d.norm() < 1e-300 {
            return Err(OpucError::Domain(format!("rational function has a pole at {z}")));
        }
        Ok((n / d, (n1 * d - n * d1) / (d * d)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledFunction {
    pub points: Vec<C64>,
    pub values: Vec<C64>,
}

impl SampledFunction {
    pub fn value_at(&self, z: C64) -> Option<C64> {
        let tol = 1e-14 * (1.0 + z.norm());
        self.points
            .iter()
            .position(|p| (p - z).norm() <= tol)
            .map(|i| self.values[i])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum LadderFn {
    Rational(RationalFunction),
    Sampled(SampledFunction),
}

impl LadderFn {
    pub fn eval(&self, z: C64) -> Result<C64> {
        match self {
            LadderFn::Rational(r) => r.eval(z),
            LadderFn::Sampled(s) => s
                .value_at(z)
                .ok_or_else(|| OpucError::Domain(format!("no sample at {z}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LadderKind {
    ClosedForm,
    QuadratureIntegral,
    QQuadratureIntegral,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LadderPair {
    pub n: usize,
    pub a: LadderFn,
    pub b: LadderFn,
    pub kind: LadderKind,
}

impl LadderPair {
    pub fn zero(n: usize, kind: LadderKind) -> Self {
        let z = LadderFn::Rational(RationalFunction::constant(ZERO));
        Self { n, a: z.clone(), b: z, kind }
    }

    pub fn rational(n: usize, a: RationalFunction, b: RationalFunction) -> Self {
        Self {
            n,
            a: LadderFn::Rational(a),
            b: LadderFn::Rational(b),
            kind: LadderKind::ClosedForm,
        }
    }

    pub fn ab(&self, z: C64) -> Result<(C64, C64)> {
        Ok((self.a.eval(z)?, self.b.eval(z)?))
    }
}

/// Anything that can produce `A_n(z)`, `B_n(z)` for every index.
pub trait Ladder: Sync {
    fn kind(&self) -> LadderKind;

    /// `(A_n(z), B_n(z))`, with `A_0 = B_0 = 0`.
    fn ab(&self, n: usize, z: C64) -> Result<(C64, C64)>;

    fn ab_many(&self, n: usize, zs: &[C64]) -> Result<Vec<(C64, C64)>> {
        zs.iter().map(|&z| self.ab(n, z)).collect()
    }

    /// `(A_n'(z), B_n'(z))`; central differences unless overridden.
    fn dab(&self, n: usize, z: C64) -> Result<(C64, C64)> {
        let h = C64::new(DIFF_STEP, 0.0);
        let v = self.ab_many(n, &[z + h, z - h])?;
        Ok(((v[0].0 - v[1].0) / (2.0 * h), (v[0].1 - v[1].1) / (2.0 * h)))
    }

    fn pair(&self, n: usize, zs: &[C64]) -> Result<LadderPair> {
        if n == 0 {
            return Ok(LadderPair::zero(0, self.kind()));
        }
        let v = self.ab_many(n, zs)?;
        let (a, b): (Vec<C64>, Vec<C64>) = v.into_iter().unzip();
        Ok(LadderPair {
            n,
            a: LadderFn::Sampled(SampledFunction { points: zs.to_vec(), values: a }),
            b: LadderFn::Sampled(SampledFunction { points: zs.to_vec(), values: b }),
            kind: self.kind(),
        })
    }
}

/// Ladder given by rational closed forms for every index.
pub struct RationalLadder<F: Fn(usize) -> Result<LadderPair> + Sync> {
    pub make: F,
}

impl<F: Fn(usize) -> Result<LadderPair> + Sync> Ladder for RationalLadder<F> {
    fn kind(&self) -> LadderKind {
        LadderKind::ClosedForm
    }

    fn ab(&self, n: usize, z: C64) -> Result<(C64, C64)> {
        if n == 0 {
            return Ok((ZERO, ZERO));
        }
        (self.make)(n)?.ab(z)
    }

    fn ab_many(&self, n: usize, zs: &[C64]) -> Result<Vec<(C64, C64)>> {
        if n == 0 {
            return Ok(vec![(ZERO, ZERO); zs.len()]);
        }
        let p = (self.make)(n)?;
        zs.iter().map(|&z| p.ab(z)).collect()
    }

    fn dab(&self, n: usize, z: C64) -> Result<(C64, C64)> {
        if n == 0 {
            return Ok((ZERO, ZERO));
        }
        let p = (self.make)(n)?;
        match (&p.a, &p.b) {
            (LadderFn::Rational(a), LadderFn::Rational(b)) => Ok((a.eval_d1(z)?.1, b.eval_d1(z)?.1)),
            _ => Err(OpucError::Domain("closed-form ladder returned sampled data".into())),
        }
    }
}

/// Classical external field `v` with `w = exp(-v)`, continued off the circle.
pub trait ExternalField: Sync {
    /// `-v(z)` as a complex logarithm of the continued, unnormalized weight.
    fn neg_v(&self, z: C64) -> C64;
    fn vprime(&self, z: C64) -> C64;
    /// `(v'(z) - v'(zeta)) / (z - zeta)`, removable singularity included.
    fn divided_difference(&self, z: C64, zeta: C64) -> C64;
}

/// `q`-external field `u` with `D_q w(z) = -u(qz) w(qz)`.
pub trait QField: Sync {
    fn q(&self) -> QReal;
    fn u(&self, z: C64) -> C64;
    /// `(u(zeta) - u(qz)) / (zeta - qz)`.
    fn q_divided_difference(&self, z: C64, zeta: C64) -> C64;
}

/// `int zeta (v'(zeta) - v'(z))/(zeta - z) w dtheta`.
pub fn m1(field: &dyn ExternalField, rule: &QuadRule, z: C64) -> C64 {
    rule.integrate(|zeta| zeta * field.divided_difference(z, zeta))
}

/// `int zeta (u(zeta) - u(qz))/(zeta - qz) w dtheta`.
pub fn q_m1(field: &dyn QField, rule: &QuadRule, z: C64) -> C64 {
    rule.integrate(|zeta| zeta * field.q_divided_difference(z, zeta))
}

struct NodeValues {
    phi: Vec<C64>,
    phistar_conj: Vec<C64>,
    phi_conj: Vec<C64>,
}

/// Node values of `phi_n(zeta)`, `conj(phi_n^*(s zeta))`, `conj(phi_n(s zeta))`.
fn node_values(sys: &OpucSystem, n: usize, rule: &QuadRule, s: f64) -> NodeValues {
    let p = sys.phi(n);
    let ps = sys.phistar(n);
    let mut out = NodeValues {
        phi: Vec::with_capacity(rule.len()),
        phistar_conj: Vec::with_capacity(rule.len()),
        phi_conj: Vec::with_capacity(rule.len()),
    };
    for &zeta in &rule.zeta {
        out.phi.push(p.eval(zeta));
        out.phistar_conj.push(ps.eval(zeta * s).conj());
        out.phi_conj.push(p.eval(zeta * s).conj());
    }
    out
}

fn ladder_integrals<D: Fn(C64) -> C64>(rule: &QuadRule, nv: &NodeValues, ratio: C64, dd: D) -> (C64, C64) {
    let mut ia = KahanSumC::default();
    let mut ib = KahanSumC::default();
    for (k, (&zeta, &m)) in rule.zeta.iter().zip(&rule.mass).enumerate() {
        if m == 0.0 {
            continue;
        }
        let d = dd(zeta) * nv.phi[k] * zeta * m;
        ia.add(d * nv.phistar_conj[k]);
        ib.add(d * (nv.phi_conj[k] - ratio * nv.phistar_conj[k]));
    }
    (ia.value(), ib.value())
}

/// `A_n`, `B_n` for `d/dz` by quadrature of their integral representations.
pub struct QuadLadder<'a> {
    pub sys: &'a OpucSystem,
    pub field: &'a dyn ExternalField,
    pub rule: QuadRule,
    pub exec: Exec,
}

impl<'a> QuadLadder<'a> {
    pub fn new(sys: &'a OpucSystem, field: &'a dyn ExternalField) -> Result<Self> {
        let m = default_grid(sys.weight(), 2 * sys.n_max() + 8);
        Self::with_grid(sys, field, m)
    }

    pub fn with_grid(sys: &'a OpucSystem, field: &'a dyn ExternalField, m: usize) -> Result<Self> {
        if !sys.weight().has_density() {
            return Err(OpucError::Domain("ladder quadrature needs a weight density".into()));
        }
        let rule = QuadRule::for_weight(sys.weight(), m)?;
        Ok(Self { sys, field, rule, exec: Exec::default() })
    }

    pub fn m1(&self, z: C64) -> C64 {
        m1(self.field, &self.rule, z)
    }
}

impl Ladder for QuadLadder<'_> {
    fn kind(&self) -> LadderKind {
        LadderKind::QuadratureIntegral
    }

    fn ab(&self, n: usize, z: C64) -> Result<(C64, C64)> {
        Ok(self.ab_many(n, &[z])?[0])
    }

    fn ab_many(&self, n: usize, zs: &[C64]) -> Result<Vec<(C64, C64)>> {
        if n == 0 {
            return Ok(vec![(ZERO, ZERO); zs.len()]);
        }
        let sys = self.sys;
        let p0 = sys.nonzero_phi0(n)?;
        let (kn, km) = (sys.kappa(n), sys.kappa(n - 1));
        let nv = node_values(sys, n, &self.rule, 1.0);
        let ratio = kn / p0;
        Ok(self.exec.map(zs, |&z| {
            let (ia, ib) = ladder_integrals(&self.rule, &nv, ratio, |zeta| {
                self.field.divided_difference(z, zeta)
            });
            let a = n as f64 * km / kn - km / p0 * z * ia;
            (a, ib)
        }))
    }
}

/// `A_n`, `B_n` for `D_q` by quadrature of their integral representations.
pub struct QQuadLadder<'a> {
    pub sys: &'a OpucSystem,
    pub field: &'a dyn QField,
    pub rule: QuadRule,
    pub exec: Exec,
}

impl<'a> QQuadLadder<'a> {
    pub fn new(sys: &'a OpucSystem, field: &'a dyn QField) -> Result<Self> {
        let m = default_grid(sys.weight(), 2 * sys.n_max() + 8);
        Self::with_grid(sys, field, m)
    }

    pub fn with_grid(sys: &'a OpucSystem, field: &'a dyn QField, m: usize) -> Result<Self> {
        if !sys.weight().has_density() {
            return Err(OpucError::Domain("ladder quadrature needs a weight density".into()));
        }
        let rule = QuadRule::for_weight(sys.weight(), m)?;
        Ok(Self { sys, field, rule, exec: Exec::default() })
    }

    pub fn m1(&self, z: C64) -> C64 {
        q_m1(self.field, &self.rule, z)
    }
}

impl Ladder for QQuadLadder<'_> {
    fn kind(&self) -> LadderKind {
        LadderKind::QQuadratureIntegral
    }

    fn ab(&self, n: usize, z: C64) -> Result<(C64, C64)> {
        Ok(self.ab_many(n, &[z])?[0])
    }

    fn ab_many(&self, n: usize, zs: &[C64]) -> Result<Vec<(C64, C64)>> {
        if n == 0 {
            return Ok(vec![(ZERO, ZERO); zs.len()]);
        }
        let sys = self.sys;
        let q = self.field.q();
        let p0 = sys.nonzero_phi0(n)?;
        let (kn, km) = (sys.kappa(n), sys.kappa(n - 1));
        let nv = node_values(sys, n, &self.rule, q.q);
        let ratio = kn / p0;
        Ok(self.exec.map(zs, |&z| {
            let (ia, ib) = ladder_integrals(&self.rule, &nv, ratio, |zeta| {
                self.field.q_divided_difference(z, zeta)
            });
            let a = km / kn * q_number(q.q, n) - km / p0 * z * ia;
            (a, ib)
        }))
    }
}

/// Sampled quadrature ladder pair, checked against a run on the doubled grid.
pub fn ladder_numeric(
    sys: &OpucSystem,
    field: &dyn ExternalField,
    n: usize,
    zs: &[C64],
) -> Result<LadderPair> {
    let lad = QuadLadder::new(sys, field)?;
    let fine = QuadLadder::with_grid(sys, field, 2 * lad.rule.len())?;
    converged_pair(&lad, &fine, n, zs)
}

pub fn q_ladder_numeric(sys: &OpucSystem, field: &dyn QField, n: usize, zs: &[C64]) -> Result<LadderPair> {
    let lad = QQuadLadder::new(sys, field)?;
    let fine = QQuadLadder::with_grid(sys, field, 2 * lad.rule.len())?;
    converged_pair(&lad, &fine, n, zs)
}

fn converged_pair(coarse: &dyn Ladder, fine: &dyn Ladder, n: usize, zs: &[C64]) -> Result<LadderPair> {
    let p = coarse.pair(n, zs)?;
    let f = fine.ab_many(n, zs)?;
    let mut drift: f64 = 0.0;
    for (&z, (a, b)) in zs.iter().zip(f) {
        let (a0, b0) = p.ab(z)?;
        drift = drift
            .max((a - a0).norm() / a.norm().max(1.0))
            .max((b - b0).norm() / b.norm().max(1.0));
    }
    if drift > 1e-9 {
        return Err(OpucError::QuadratureNotConverged { drift });
    }
    Ok(p)
}

fn rel(terms: &[C64]) -> f64 {
    let scale = terms.iter().map(|t| t.norm()).fold(0.0, f64::max);
    let s: C64 = terms.iter().sum();
    if scale == 0.0 {
        s.norm()
    } else {
        s.norm() / scale
    }
}

/// `max |phi_n' - A_n phi_{n-1} + B_n phi_n| / scale`.
pub fn lowering_residual(sys: &OpucSystem, pair: &LadderPair, zs: &[C64]) -> Result<f64> {
    let n = pair.n;
    if n == 0 || n > sys.n_max() {
        return Err(OpucError::Domain(format!("lowering needs 1 <= n <= {}", sys.n_max())));
    }
    let dp = sys.phi(n).derivative();
    let mut worst: f64 = 0.0;
    for &z in zs {
        let (a, b) = pair.ab(z)?;
        let t = [dp.eval(z), -a * sys.phi(n - 1).eval(z), b * sys.phi(n).eval(z)];
        worst = worst.max(rel(&t));
    }
    Ok(worst)
}

/// `max |D_q phi_n - A_n phi_{n-1} + B_n phi_n| / scale`.
pub fn q_lowering_residual(sys: &OpucSystem, pair: &LadderPair, q: QReal, zs: &[C64]) -> Result<f64> {
    let n = pair.n;
    if n == 0 || n > sys.n_max() {
        return Err(OpucError::Domain(format!("lowering needs 1 <= n <= {}", sys.n_max())));
    }
    let dp = sys.phi(n).q_difference(q);
    let mut worst: f64 = 0.0;
    for &z in zs {
        let (a, b) = pair.ab(z)?;
        let t = [dp.eval(z), -a * sys.phi(n - 1).eval(z), b * sys.phi(n).eval(z)];
        worst = worst.max(rel(&t));
    }
    Ok(worst)
}

/// `L_{n,2} phi_{n-1} = (A_{n-1}/z) (phi_{n-1}(0) kappa_{n-1} / (phi_n(0) kappa_{n-2})) phi_n`,
/// with `T` the derivative (`q = None`) or `D_q`.
fn raising(sys: &OpucSystem, lad: &dyn Ladder, n: usize, zs: &[C64], q: Option<QReal>) -> Result<f64> {
    if n < 2 || n > sys.n_max() {
        return Err(OpucError::Domain(format!("raising needs 2 <= n <= {}", sys.n_max())));
    }
    let p0n = sys.nonzero_phi0(n)?;
    let p0m = sys.phi0(n - 1);
    let (kn, km, kmm) = (sys.kappa(n), sys.kappa(n - 1), sys.kappa(n - 2));
    let prev = sys.phi(n - 1);
    let tprev = match q {
        None => prev.derivative(),
        Some(q) => prev.q_difference(q),
    };
    let vals = lad.ab_many(n - 1, zs)?;
    let mut worst: f64 = 0.0;
    for (&z, (a1, b1)) in zs.iter().zip(vals) {
        let f = prev.eval(z);
        let t = [
            -tprev.eval(z),
            -b1 * f,
            a1 * km / (z * kmm) * f,
            a1 * kn * p0m / (kmm * p0n) * f,
            -(a1 / z) * (p0m * km / (p0n * kmm)) * sys.phi(n).eval(z),
        ];
        worst = worst.max(rel(&t));
    }
    Ok(worst)
}

pub fn raising_residual(sys: &OpucSystem, lad: &dyn Ladder, n: usize, zs: &[C64]) -> Result<f64> {
    raising(sys, lad, n, zs, None)
}

pub fn q_raising_residual(sys: &OpucSystem, lad: &dyn Ladder, q: QReal, n: usize, zs: &[C64]) -> Result<f64> {
    raising(sys, lad, n, zs, Some(q))
}

fn sampled(zs: &[C64], v: Vec<C64>) -> SampledFunction {
    SampledFunction { points: zs.to_vec(), values: v }
}

/// `P`, `Q` of `phi_n'' + P phi_n' + Q phi_n = 0` from the ladder at
/// indices `n` and `n-1` (`n >= 2`).
pub fn ode_coefficients(
    lad: &dyn Ladder,
    sys: &OpucSystem,
    n: usize,
    zs: &[C64],
) -> Result<(SampledFunction, SampledFunction)> {
    if n < 2 || n > sys.n_max() {
        return Err(OpucError::Domain(format!("ode needs 2 <= n <= {}", sys.n_max())));
    }
    let p0n = sys.nonzero_phi0(n)?;
    let p0m = sys.nonzero_phi0(n - 1)?;
    let (kn, km, kmm) = (sys.kappa(n), sys.kappa(n - 1), sys.kappa(n - 2));
    let c1 = km / kmm;
    let c2 = kn / kmm * p0m / p0n;
    let c3 = km / kmm * p0m / p0n;
    let mut ps = Vec::with_capacity(zs.len());
    let mut qs = Vec::with_capacity(zs.len());
    for &z in zs {
        let (an, bn) = lad.ab(n, z)?;
        let (dan, dbn) = lad.dab(n, z)?;
        let (am, bm) = lad.ab(n - 1, z)?;
        let lg = dan / an;
        ps.push(bn + bm - lg - c1 * am / z - c2 * am);
        qs.push(dbn - bn * lg + bn * bm - c1 * am * bn / z - c2 * am * bn + c3 * am * an / z);
    }
    Ok((sampled(zs, ps), sampled(zs, qs)))
}

/// `P`, `Q` from the alternate elimination using indices `n` and `n+1`.
pub fn ode_coefficients_alt(
    lad: &dyn Ladder,
    sys: &OpucSystem,
    n: usize,
    zs: &[C64],
) -> Result<(SampledFunction, SampledFunction)> {
    if n < 1 || n + 1 > sys.n_max() {
        return Err(OpucError::Domain(format!("alternate ode needs 1 <= n < {}", sys.n_max())));
    }
    let p0n = sys.nonzero_phi0(n)?;
    let p0p = sys.nonzero_phi0(n + 1)?;
    let (kp, kn, km) = (sys.kappa(n + 1), sys.kappa(n), sys.kappa(n - 1));
    let c1 = kn / km;
    let c2 = kp / km * p0n / p0p;
    let c3 = kn / km * p0n / p0p;
    let mut ps = Vec::with_capacity(zs.len());
    let mut qs = Vec::with_capacity(zs.len());
    for &z in zs {
        let (an, bn) = lad.ab(n, z)?;
        let (dan, dbn) = lad.dab(n, z)?;
        let (ap, bp) = lad.ab(n + 1, z)?;
        let lg = dan / an;
        ps.push(bp + bn - lg - c1 * an / z - c2 * an + 1.0 / z);
        qs.push(
            dbn - bn * lg + bp * bn - c1 * an * bp / z - c2 * an * bp + c3 * an * ap / z + bn / z
                - c2 * an / z,
        );
    }
    Ok((sampled(zs, ps), sampled(zs, qs)))
}

/// `max |phi_n'' + P phi_n' + Q phi_n| / scale` over the sample points of `P`.
pub fn ode_residual(sys: &OpucSystem, n: usize, p: &SampledFunction, q: &SampledFunction) -> f64 {
    let f = sys.phi(n);
    let mut worst: f64 = 0.0;
    for (i, &z) in p.points.iter().enumerate() {
        let (v, d1, d2) = f.eval_d2(z);
        worst = worst.max(rel(&[d2, p.values[i] * d1, q.values[i] * v]));
    }
    worst
}

/// Residual of
/// `B_n + B_{n-1} - (k_{n-1}/k_{n-2}) A_{n-1}/z - (k_n/k_{n-2})(phi_{n-1}(0)/phi_n(0)) A_{n-1}
///  = -(n-1)/z - v'(z)`.
pub fn functional_equation_residual(
    sys: &OpucSystem,
    lad: &dyn Ladder,
    field: &dyn ExternalField,
    n: usize,
    zs: &[C64],
) -> Result<f64> {
    if n < 2 || n > sys.n_max() {
        return Err(OpucError::Domain(format!("functional equation needs 2 <= n <= {}", sys.n_max())));
    }
    let p0n = sys.nonzero_phi0(n)?;
    let p0m = sys.nonzero_phi0(n - 1)?;
    let (kn, km, kmm) = (sys.kappa(n), sys.kappa(n - 1), sys.kappa(n - 2));
    let nn = lad.ab_many(n, zs)?;
    let mm = lad.ab_many(n - 1, zs)?;
    let mut worst: f64 = 0.0;
    for (i, &z) in zs.iter().enumerate() {
        let (_, bn) = nn[i];
        let (am, bm) = mm[i];
        let t = [
            bn,
            bm,
            -km / kmm * am / z,
            -kn / kmm * p0m / p0n * am,
            (n as f64 - 1.0) / z,
            field.vprime(z),
        ];
        worst = worst.max(rel(&t));
    }
    Ok(worst)
}

/// `B_1 + M_1 (1 + k_1 z / phi_1(0)) + v'(z)`, i.e. the `n = 1` value of the
/// functional equation's right side recovered from the ladder.
pub fn ab_new_residual(sys: &OpucSystem, lad: &QuadLadder<'_>, zs: &[C64]) -> Result<f64> {
    let p01 = sys.nonzero_phi0(1)?;
    let k1 = sys.kappa(1);
    let b = lad.ab_many(1, zs)?;
    let mut worst: f64 = 0.0;
    for (i, &z) in zs.iter().enumerate() {
        let m = lad.m1(z);
        let t = [b[i].1, m, m * k1 * z / p01, lad.field.vprime(z)];
        worst = worst.max(rel(&t));
    }
    Ok(worst)
}

/// Low-order anchors: `B_1 = -v' - (phi_1/phi_1(0)) M_1` and
/// `A_1 = k_1 - phi_1 v' - phi_1^2/phi_1(0) M_1`.
pub fn low_order_residual(sys: &OpucSystem, lad: &QuadLadder<'_>, zs: &[C64]) -> Result<f64> {
    let p01 = sys.nonzero_phi0(1)?;
    let k1 = sys.kappa(1);
    let v = lad.ab_many(1, zs)?;
    let mut worst: f64 = 0.0;
    for (i, &z) in zs.iter().enumerate() {
        let m = lad.m1(z);
        let f = sys.phi(1).eval(z);
        let vp = lad.field.vprime(z);
        let (a, b) = v[i];
        worst = worst
            .max(rel(&[b, vp, f / p01 * m]))
            .max(rel(&[a, -C64::new(k1, 0.0), f * vp, f * f / p01 * m]));
    }
    Ok(worst)
}

fn q_fe_terms(
    sys: &OpucSystem,
    lad: &dyn Ladder,
    n: usize,
    z: C64,
) -> Result<(C64, C64)> {
    // j-th summand B_{j+1} - (k_j/k_{j-1}) A_j / z for j >= 1
    let (_, b) = lad.ab(n + 1, z)?;
    let (a, _) = lad.ab(n, z)?;
    Ok((b, -sys.kappa(n) / sys.kappa(n - 1) * a / z))
}

/// Residual of the `q` functional equation
/// `B_n + B_{n-1} - (k_{n-1}/k_{n-2}) A_{n-1}/z - (k_n/k_{n-2})(phi_{n-1}(0)/phi_n(0)) A_{n-1}
///  = -(n-1)/(qz) - u(qz)/q - ((1-q)/q) sum_{j<n} [B_{j+1} - (k_j/k_{j-1}) A_j/z]`,
/// where the `j = 0` summand is `B_1 + k_0 M_1(z)`.
pub fn q_functional_equation_residual(
    sys: &OpucSystem,
    lad: &dyn Ladder,
    field: &dyn QField,
    n: usize,
    zs: &[C64],
) -> Result<f64> {
    if n < 2 || n > sys.n_max() {
        return Err(OpucError::Domain(format!("functional equation needs 2 <= n <= {}", sys.n_max())));
    }
    let q = field.q();
    let qq = q.q;
    let p0n = sys.nonzero_phi0(n)?;
    let p0m = sys.nonzero_phi0(n - 1)?;
    let (kn, km, kmm) = (sys.kappa(n), sys.kappa(n - 1), sys.kappa(n - 2));
    let m = default_grid(sys.weight(), 2 * sys.n_max() + 8);
    let rule = QuadRule::for_weight(sys.weight(), m)?;
    let mut worst: f64 = 0.0;
    for &z in zs {
        let (_, bn) = lad.ab(n, z)?;
        let (am, bm) = lad.ab(n - 1, z)?;
        let (_, b1) = lad.ab(1, z)?;
        let mut terms = vec![
            bn,
            bm,
            -km / kmm * am / z,
            -kn / kmm * p0m / p0n * am,
            (n as f64 - 1.0) / (qq * z),
            field.u(qq * z) / qq,
        ];
        let f = (1.0 - qq) / qq;
        let mut sum = b1 + sys.kappa(0) * q_m1(field, &rule, z);
        for j in 1..n {
            let (b, a) = q_fe_terms(sys, lad, j, z)?;
            sum += b + a;
        }
        terms.push(f * sum);
        worst = worst.max(rel(&terms));
    }
    Ok(worst)
}

/// Residual of the unsummed difference equation between indices `n-1`, `n`, `n+1`.
pub fn q_fe_diff_residual(sys: &OpucSystem, lad: &dyn Ladder, q: QReal, n: usize, zs: &[C64]) -> Result<f64> {
    if n < 2 || n + 1 > sys.n_max() {
        return Err(OpucError::Domain(format!("difference equation needs 2 <= n < {}", sys.n_max())));
    }
    let qq = q.q;
    let p0p = sys.nonzero_phi0(n + 1)?;
    let p0n = sys.nonzero_phi0(n)?;
    let p0m = sys.nonzero_phi0(n - 1)?;
    let (kp, kn, km, kmm) = (sys.kappa(n + 1), sys.kappa(n), sys.kappa(n - 1), sys.kappa(n - 2));
    let mut worst: f64 = 0.0;
    for &z in zs {
        let (_, bp) = lad.ab(n + 1, z)?;
        let (an, _) = lad.ab(n, z)?;
        let (am, bm) = lad.ab(n - 1, z)?;
        let t = [
            bp / qq,
            -bm,
            -kn / km * an / (qq * z),
            km / kmm * am / z,
            -kp / km * p0n / p0p * an,
            kn / kmm * p0m / p0n * am,
            1.0 / (qq * z),
        ];
        worst = worst.max(rel(&t));
    }
    Ok(worst)
}

/// Right side of the `q` functional equation evaluated with classical
/// ladder data and `u` replaced by `v'`; tends to `-(n-1)/z - v'(z)` as `q -> 1`.
pub fn q_limit_rhs(
    sys: &OpucSystem,
    lad: &dyn Ladder,
    field: &dyn ExternalField,
    q: f64,
    n: usize,
    z: C64,
    rule: &QuadRule,
) -> Result<C64> {
    let (_, b1) = lad.ab(1, z)?;
    let mut sum = b1 + sys.kappa(0) * m1(field, rule, z);
    for j in 1..n {
        let (b, a) = q_fe_terms(sys, lad, j, z)?;
        sum += b + a;
    }
    Ok(-(n as f64 - 1.0) / (q * z) - field.vprime(q * z) / q - (1.0 - q) / q * sum)
}

/// `|(L f, g) - (f, L^* g)| / (|f| |g|)` for `L = d/dz + B_n` and
/// `L^* g = z^2 g' + z g + conj(v' + B_n) g`, inner product `int f conj(g) w dtheta`.
pub fn adjoint_residual(
    sys: &OpucSystem,
    lad: &dyn Ladder,
    field: &dyn ExternalField,
    n: usize,
    f: &ComplexPoly,
    g: &ComplexPoly,
) -> Result<f64> {
    let m = default_grid(sys.weight(), 2 * (f.degree() + g.degree() + sys.n_max()) + 16);
    let rule = QuadRule::for_weight(sys.weight(), m)?;
    let df = f.derivative();
    let dg = g.derivative();
    let pts: Vec<C64> = rule
        .zeta
        .iter()
        .zip(&rule.mass)
        .filter(|(_, &m)| m != 0.0)
        .map(|(z, _)| *z)
        .collect();
    let bs = lad.ab_many(n, &pts)?;
    let (mut lhs, mut rhs, mut nf, mut ng) = (
        KahanSumC::default(),
        KahanSumC::default(),
        KahanSumC::default(),
        KahanSumC::default(),
    );
    let mut i = 0;
    for (&z, &mass) in rule.zeta.iter().zip(&rule.mass) {
        if mass == 0.0 {
            continue;
        }
        let b = bs[i].1;
        i += 1;
        let (fz, gz) = (f.eval(z), g.eval(z));
        let lf = df.eval(z) + b * fz;
        let lsg = z * z * dg.eval(z) + z * gz + (field.vprime(z) + b).conj() * gz;
        lhs.add(lf * gz.conj() * mass);
        rhs.add(fz * lsg.conj() * mass);
        nf.add(C64::new(fz.norm_sqr() * mass, 0.0));
        ng.add(C64::new(gz.norm_sqr() * mass, 0.0));
    }
    Ok((lhs.value() - rhs.value()).norm() / (nf.value().re * ng.value().re).sqrt())
}

/// `q`-version with `L = D_q + B_n` and
/// `L^* g = z^2 [q - (1-q) conj(z u(z))] D_q g + z g + [conj(B_n) + conj(u)] g`.
pub fn q_adjoint_residual(
    sys: &OpucSystem,
    lad: &dyn Ladder,
    field: &dyn QField,
    n: usize,
    f: &ComplexPoly,
    g: &ComplexPoly,
) -> Result<f64> {
    let q = field.q();
    let m = default_grid(sys.weight(), 2 * (f.degree() + g.degree() + sys.n_max()) + 16);
    let rule = QuadRule::for_weight(sys.weight(), m)?;
    let df = f.q_difference(q);
    let dg = g.q_difference(q);
    let bs = lad.ab_many(n, &rule.zeta)?;
    let (mut lhs, mut rhs, mut nf, mut ng) = (
        KahanSumC::default(),
        KahanSumC::default(),
        KahanSumC::default(),
        KahanSumC::default(),
    );
    for (k, (&z, &mass)) in rule.zeta.iter().zip(&rule.mass).enumerate() {
        if mass == 0.0 {
            continue;
        }
        let b = bs[k].1;
        let (fz, gz) = (f.eval(z), g.eval(z));
        let u = field.u(z);
        let lf = df.eval(z) + b * fz;
        let lsg = z * z * (q.q - (1.0 - q.q) * (z * u).conj()) * dg.eval(z) + z * gz + (b.conj() + u.conj()) * gz;
        lhs.add(lf * gz.conj() * mass);
        rhs.add(fz * lsg.conj() * mass);
        nf.add(C64::new(fz.norm_sqr() * mass, 0.0));
        ng.add(C64::new(gz.norm_sqr() * mass, 0.0));
    }
    Ok((lhs.value() - rhs.value()).norm() / (nf.value().re * ng.value().re).sqrt())
}

/// Points `r e^{i(phase + 2 pi j / k)}`.
pub fn circle_samples(k: usize, r: f64, phase: f64) -> Vec<C64> {
    (0..k)
        .map(|j| C64::from_polar(r, phase + 2.0 * std::f64::consts::PI * j as f64 / k as f64))
        .collect()
}

/// Default identity-check contour: 16 points on `|z| = 1/2`.
pub fn default_samples() -> Vec<C64> {
    circle_samples(16, 0.5, 0.3)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_derivative() {
        let r = RationalFunction::new(
            ComplexPoly::from_real(&[1.0, 2.0]),
            ComplexPoly::from_real(&[1.0, -1.0]),
        );
        let z = C64::new(0.3, 0.2);
        let (v, d) = r.eval_d1(z).unwrap();
        assert!((v - (1.0 + 2.0 * z) / (1.0 - z)).norm() < 1e-15);
        assert!((d - 3.0 / ((1.0 - z) * (1.0 - z))).norm() < 1e-14);
        assert!(r.eval(C64::new(1.0, 0.0)).is_err());
    }

    #[test]
    fn sampled_lookup() {
        let s = SampledFunction {
            points: vec![C64::new(0.5, 0.0)],
            values: vec![C64::new(2.0, 0.0)],
        };
        assert_eq!(s.value_at(C64::new(0.5, 0.0)), Some(C64::new(2.0, 0.0)));
        assert!(s.value_at(C64::new(0.4, 0.0)).is_none());
    }
}
