//! Discriminants: classical, resultant-based, generalized (`D(f, T)` for a
//! degree-reducing `T`) and `q`-discriminants, with Schur's product
//! `Delta_n = prod_j phi_{n-1}(z_{j,n})` and its closed form.

use crate::engine::OpucSystem;
use crate::error::{OpucError, Result};
use crate::families::{closed_ladder, closed_q_ladder};
use crate::ladder::Ladder;
use crate::logval::LogValue;
use crate::moments::lu_logdet;
use crate::poly::{ComplexPoly, QReal, ZERO};
use crate::report::{Check, VerificationReport};
use crate::special::{pochhammer, q_poch, QLen};
use crate::weight::WeightSpec;
use crate::zeros::roots;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::io::Write;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DiscMethod {
    RootProduct,
    Resultant,
    Sylvester,
    ClosedForm,
    SchurLemma,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscriminantResult {
    pub value: LogValue,
    pub method: DiscMethod,
    pub n: usize,
    pub params: BTreeMap<String, f64>,
}

impl DiscriminantResult {
    fn new(value: LogValue, method: DiscMethod, n: usize) -> Self {
        Self { value, method, n, params: BTreeMap::new() }
    }

    fn with_params(mut self, p: BTreeMap<String, f64>) -> Self {
        self.params = p;
        self
    }

    pub fn to_complex(&self) -> Option<C64> {
        self.value.to_complex()
    }
}

/// Two independent evaluations of the same quantity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscriminantPair {
    pub first: DiscriminantResult,
    pub second: DiscriminantResult,
}

impl DiscriminantPair {
    pub fn agreement(&self) -> f64 {
        self.first.value.rel_diff(self.second.value)
    }
}

fn sign_n(n: usize) -> LogValue {
    LogValue::from_real(if (n * (n - 1) / 2).is_multiple_of(2) { 1.0 } else { -1.0 })
}

fn lv(x: f64) -> LogValue {
    LogValue::from_real(x)
}

fn product<I: IntoIterator<Item = C64>>(it: I) -> LogValue {
    it.into_iter().fold(LogValue::ONE, |acc, z| acc.mul_c(z))
}

fn need_degree(p: &ComplexPoly, min: usize) -> Result<ComplexPoly> {
    let p = p.trimmed();
    if p.degree() < min {
        return Err(OpucError::Domain(format!("discriminant needs degree >= {min}")));
    }
    Ok(p)
}

/// `gamma^{2n-2} prod_{j<k} (z_j - z_k)^2` over the sorted roots.
pub fn disc_root_product(p: &ComplexPoly) -> Result<DiscriminantResult> {
    let p = need_degree(p, 2)?;
    let n = p.degree();
    let z = roots(&p)?.roots;
    let mut v = LogValue::from_complex(p.leading()).powi(2 * n as i64 - 2);
    for j in 0..n {
        for k in j + 1..n {
            v = v.mul(LogValue::from_complex(z[j] - z[k]).powi(2));
        }
    }
    Ok(DiscriminantResult::new(v, DiscMethod::RootProduct, n))
}

/// `R{f, g} = gamma^m prod_j g(z_j)` over the roots of `f`.
pub fn resultant(f: &ComplexPoly, g: &ComplexPoly) -> Result<LogValue> {
    let f = need_degree(f, 1)?;
    let g = g.trimmed();
    let z = roots(&f)?.roots;
    Ok(LogValue::from_complex(f.leading())
        .powi(g.degree() as i64)
        .mul(product(z.iter().map(|&r| g.eval(r)))))
}

/// `(-1)^{n(n-1)/2} gamma^{-1} R{f, f'}`
pub fn disc_resultant(p: &ComplexPoly) -> Result<DiscriminantResult> {
    let p = need_degree(p, 2)?;
    let n = p.degree();
    let v = sign_n(n)
        .mul(resultant(&p, &p.derivative())?)
        .div(LogValue::from_complex(p.leading()));
    Ok(DiscriminantResult::new(v, DiscMethod::Resultant, n))
}

/// Determinant of the Sylvester matrix of `f` and `g`.
pub fn sylvester_resultant(f: &ComplexPoly, g: &ComplexPoly) -> Result<LogValue> {
    let (f, g) = (f.trimmed(), g.trimmed());
    let (n, m) = (f.degree(), g.degree());
    let size = n + m;
    let mut a = vec![vec![ZERO; size]; size];
    for i in 0..m {
        for k in 0..=n {
            a[i][i + k] = f.coeff(n - k);
        }
    }
    for i in 0..n {
        for k in 0..=m {
            a[m + i][i + k] = g.coeff(m - k);
        }
    }
    lu_logdet(a)
}

/// Resultant route through the Sylvester determinant, for degree at most 6.
pub fn disc_sylvester(p: &ComplexPoly) -> Result<DiscriminantResult> {
    let p = need_degree(p, 2)?;
    let n = p.degree();
    if n > 6 {
        return Err(OpucError::Domain("Sylvester cross-check is limited to degree <= 6".into()));
    }
    let v = sign_n(n)
        .mul(sylvester_resultant(&p, &p.derivative())?)
        .div(LogValue::from_complex(p.leading()));
    Ok(DiscriminantResult::new(v, DiscMethod::Sylvester, n))
}

/// Root-product and resultant evaluations of `D(p)`.
pub fn discriminant(p: &ComplexPoly) -> Result<DiscriminantPair> {
    Ok(DiscriminantPair { first: disc_root_product(p)?, second: disc_resultant(p)? })
}

/// `gamma^{2n-2} q^{n(n-1)/2} prod_{j<k} (q^{1/2} z_j - q^{-1/2} z_k)(q^{-1/2} z_j - q^{1/2} z_k)`
/// and the form with `z_j^2 + z_k^2 - (q + 1/q) z_j z_k`.
pub fn q_discriminant(p: &ComplexPoly, q: QReal) -> Result<DiscriminantPair> {
    let p = need_degree(p, 2)?;
    let n = p.degree();
    let z = roots(&p)?.roots;
    let (s, qq) = (q.sqrt_q, q.q);
    let head = LogValue::from_complex(p.leading())
        .powi(2 * n as i64 - 2)
        .mul(lv(qq).powi((n * (n - 1) / 2) as i64));
    let (mut v1, mut v2) = (head, head);
    for j in 0..n {
        for k in j + 1..n {
            let (a, b) = (z[j], z[k]);
            v1 = v1.mul_c((s * a - b / s) * (a / s - s * b));
            v2 = v2.mul_c(a * a + b * b - a * b * (qq + 1.0 / qq));
        }
    }
    Ok(DiscriminantPair {
        first: DiscriminantResult::new(v1, DiscMethod::RootProduct, n),
        second: DiscriminantResult::new(v2, DiscMethod::RootProduct, n),
    })
}

/// `phi_n(0)^{n-1} / (kappa_n^{n-1} kappa_{n-1}^n) prod_{j<n} kappa_j^2`, with `Delta_1 = 1`.
pub fn delta_closed(sys: &OpucSystem, n: usize) -> Result<DiscriminantResult> {
    check_n(sys, n)?;
    let v = if n == 1 {
        LogValue::ONE
    } else {
        let p0 = sys.nonzero_phi0(n)?;
        LogValue::from_complex(p0)
            .powi(n as i64 - 1)
            .div(lv(sys.kappa(n)).powi(n as i64 - 1))
            .div(lv(sys.kappa(n - 1)).powi(n as i64))
            .mul(kappa_squares(sys, n))
    };
    Ok(DiscriminantResult::new(v, DiscMethod::SchurLemma, n).with_params(sys.weight().params()))
}

fn kappa_squares(sys: &OpucSystem, n: usize) -> LogValue {
    (1..n).fold(LogValue::ONE, |acc, j| acc.mul(lv(sys.kappa(j)).powi(2)))
}

fn check_n(sys: &OpucSystem, n: usize) -> Result<()> {
    if n == 0 || n > sys.n_max() {
        return Err(OpucError::Domain(format!("index {n} outside 1 ..= {}", sys.n_max())));
    }
    Ok(())
}

/// `prod_j phi_{n-1}(z_{j,n})` over the zeros of `phi_n`.
pub fn delta_brute(sys: &OpucSystem, n: usize) -> Result<DiscriminantResult> {
    check_n(sys, n)?;
    let z = roots(sys.phi(n))?.roots;
    let prev = sys.phi(n - 1);
    Ok(DiscriminantResult::new(product(z.iter().map(|&r| prev.eval(r))), DiscMethod::RootProduct, n)
        .with_params(sys.weight().params()))
}

/// Schur's product by root evaluation and by the closed form. The closed
/// form needs `phi_n(0) != 0`.
pub fn delta(sys: &OpucSystem, n: usize) -> Result<DiscriminantPair> {
    let second = delta_closed(sys, n)?;
    Ok(DiscriminantPair { first: delta_brute(sys, n)?, second })
}

fn lpoch(a: f64, n: usize) -> LogValue {
    lv(pochhammer(a, n))
}

fn lfact(n: usize) -> LogValue {
    lpoch(1.0, n)
}

/// Circular-Jacobi `Delta_n` in closed form.
pub fn cj_delta(a: f64, n: usize) -> LogValue {
    if n == 1 {
        return LogValue::ONE;
    }
    let nf = n as f64;
    let base = lfact(n - 1).mul(lpoch(2.0 * a + 1.0, n - 1)).div(lpoch(a + 1.0, n - 1).powi(2));
    let mut v = lv(a / (nf + a)).powi(n as i64 - 1).mul(half_power(base, n as i64));
    for j in 1..n {
        v = v.mul(lpoch(a + 1.0, j).powi(2)).div(lfact(j)).div(lpoch(2.0 * a + 1.0, j));
    }
    v
}

/// `x^{k/2}` for positive `x`.
fn half_power(x: LogValue, k: i64) -> LogValue {
    LogValue { log_abs: x.log_abs * k as f64 / 2.0, phase: C64::new(1.0, 0.0) }
}

/// Szegő `Delta_m` in closed form; the odd and even indices differ.
pub fn sz_delta(a: f64, b: f64, m: usize) -> LogValue {
    if m == 1 {
        return LogValue::ONE;
    }
    let s = a + b + 1.0;
    let n = m.div_ceil(2);
    let tail = |top: usize| {
        let mut num = LogValue::ONE;
        for j in 1..=top {
            num = num.mul(lpoch(s, j));
        }
        let mut den = LogValue::ONE;
        for l in 1..n {
            den = den.mul(lfact(l)).mul(lpoch(s, l)).mul(lpoch(a + 0.5, l)).mul(lpoch(b + 0.5, l));
        }
        num.div(den).powi(2)
    };
    if m.is_multiple_of(2) {
        let ha = lpoch(a + 0.5, n).mul(lpoch(b + 0.5, n));
        let base = lfact(n - 1).mul(lpoch(s, n - 1)).mul(ha).div(lpoch(s, 2 * n - 1).powi(2));
        lv((a + b) / (2.0 * n as f64 + a + b))
            .powi(2 * n as i64 - 1)
            .mul(base.powi(n as i64))
            .div(ha)
            .mul(tail(2 * n - 1))
    } else {
        let ha = lpoch(a + 0.5, n - 1).mul(lpoch(b + 0.5, n - 1));
        let base = lfact(n - 1).mul(lpoch(s, n - 1)).mul(ha).div(lpoch(s, 2 * n - 2).powi(2));
        lv((a - b) / (2.0 * n as f64 - 1.0 + a + b))
            .powi(2 * n as i64 - 2)
            .mul(half_power(base, 2 * n as i64 - 1))
            .mul(lfact(n - 1))
            .mul(lpoch(s, n - 1))
            .mul(tail(2 * n - 2))
    }
}

/// Degree-reducing operator of a generalized discriminant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum DiscOperator {
    Derivative,
    QDifference(QReal),
}

impl DiscOperator {
    pub fn apply(&self, p: &ComplexPoly) -> ComplexPoly {
        match self {
            DiscOperator::Derivative => p.derivative(),
            DiscOperator::QDifference(q) => p.q_difference(*q),
        }
    }
}

/// `(-1)^{n(n-1)/2} gamma^{n-2} prod_j (T p)(z_j)`
pub fn generalized_discriminant_brute(p: &ComplexPoly, op: DiscOperator) -> Result<DiscriminantResult> {
    let p = need_degree(p, 1)?;
    let n = p.degree();
    let tp = op.apply(&p);
    let z = roots(&p)?.roots;
    let v = sign_n(n)
        .mul(LogValue::from_complex(p.leading()).powi(n as i64 - 2))
        .mul(product(z.iter().map(|&r| tp.eval(r))));
    Ok(DiscriminantResult::new(v, DiscMethod::RootProduct, n))
}

/// Closed form through the ladder coefficient `A_n` at the zeros of `phi_n`.
pub fn generalized_discriminant_closed(sys: &OpucSystem, n: usize, lad: &dyn Ladder) -> Result<DiscriminantResult> {
    check_n(sys, n)?;
    let p0 = sys.nonzero_phi0(n)?;
    let z = roots(sys.phi(n))?.roots;
    let mut prod_a = LogValue::ONE;
    for &r in &z {
        prod_a = prod_a.mul_c(lad.ab(n, r)?.0);
    }
    let v = sign_n(n)
        .mul(LogValue::from_complex(p0).powi(n as i64 - 1))
        .div(lv(sys.kappa(n)))
        .div(lv(sys.kappa(n - 1)).powi(n as i64))
        .mul(kappa_squares(sys, n))
        .mul(prod_a);
    Ok(DiscriminantResult::new(v, DiscMethod::ClosedForm, n).with_params(sys.weight().params()))
}

/// `D(phi_n, T)` by root evaluation and through the ladder, using the
/// closed-form ladder of the system's weight.
pub fn generalized_discriminant(sys: &OpucSystem, n: usize, op: DiscOperator) -> Result<DiscriminantPair> {
    let w = sys.weight();
    let lad: Box<dyn Ladder + '_> = match op {
        DiscOperator::Derivative => closed_ladder(w, sys)?,
        DiscOperator::QDifference(q) => {
            let l = closed_q_ladder(w)?;
            if let WeightSpec::RogersSzego { q: wq } = *w {
                if wq != q.q {
                    return Err(OpucError::NoLadderForOperator(format!(
                        "D_q with q = {} for a weight with q = {wq}",
                        q.q
                    )));
                }
            }
            l
        }
    };
    check_n(sys, n)?;
    let first = generalized_discriminant_brute(sys.phi(n), op)?.with_params(w.params());
    let second = generalized_discriminant_closed(sys, n, lad.as_ref())?;
    Ok(DiscriminantPair { first, second })
}

fn lqp(q: f64, n: usize) -> LogValue {
    lv(q_poch(q, q, QLen::Finite(n)))
}

fn inv_qp_product(q: f64, top: usize) -> LogValue {
    (1..=top).fold(LogValue::ONE, |acc, j| acc.div(lqp(q, j)))
}

/// `D(phi_n, D_q) = (-q)^{n(n-1)/2} (1-q)^{-n} (q;q)_n prod_{j<n} 1/(q;q)_j`
pub fn rs_disc(q: QReal, n: usize) -> LogValue {
    let e = (n * (n - 1) / 2) as i64;
    lv(-q.q)
        .powi(e)
        .div(lv(1.0 - q.q).powi(n as i64))
        .mul(lqp(q.q, n))
        .mul(inv_qp_product(q.q, n.saturating_sub(1)))
}

/// `D(H_n, q) = (-q)^{-n(n-1)/2} [(q;q)_n/(1-q)]^n prod_{j<n} 1/(q;q)_j`
pub fn rs_disc2(q: QReal, n: usize) -> LogValue {
    let e = (n * (n - 1) / 2) as i64;
    lv(-q.q)
        .powi(-e)
        .mul(lqp(q.q, n).div(lv(1.0 - q.q)).powi(n as i64))
        .mul(inv_qp_product(q.q, n.saturating_sub(1)))
}

/// `D(H_n, q)` rearranged so the vanishing as `q -> 1` is explicit:
/// `(-q)^{-n(n-1)/2} (1-q)^{n(n-1)/2} [(q;q)_n/(1-q)^n]^{n+1} prod_{j<=n} (1-q)^j/(q;q)_j`.
pub fn rs_disc3(q: QReal, n: usize) -> LogValue {
    let e = (n * (n - 1) / 2) as i64;
    let r = lv(1.0 - q.q);
    let mut v = lv(-q.q)
        .powi(-e)
        .mul(r.powi(e))
        .mul(lqp(q.q, n).div(r.powi(n as i64)).powi(n as i64 + 1));
    for j in 1..=n {
        v = v.mul(r.powi(j as i64)).div(lqp(q.q, j));
    }
    v
}

/// The rearrangement as commonly printed, with `(-q)^{+n(n-1)/2}` and the
/// bracket to the power `n`. It does not equal [`rs_disc2`].
pub fn rs_disc3_printed(q: QReal, n: usize) -> LogValue {
    let e = (n * (n - 1) / 2) as i64;
    let r = lv(1.0 - q.q);
    let mut v = lv(-q.q)
        .powi(e)
        .mul(r.powi(e))
        .mul(lqp(q.q, n).div(r.powi(n as i64)).powi(n as i64));
    for j in 1..=n {
        v = v.mul(r.powi(j as i64)).div(lqp(q.q, j));
    }
    v
}

/// Behaviour of `D(H_n, q)` as `q -> 1`, for `2 <= n <= n_max`.
pub fn rs_disc_q_limit(n_max: usize, q_grid: &[f64]) -> Result<VerificationReport> {
    if q_grid.windows(2).any(|w| !(w[0] < w[1])) || q_grid.iter().any(|&q| !(q > 0.0 && q < 1.0)) {
        return Err(OpucError::Domain("q grid must increase strictly inside (0, 1)".into()));
    }
    let mut rep = VerificationReport::new("q-disc-limit", "rogers-szego-discriminant-limit", "rs")
        .param("n_max", n_max as f64);
    for n in 2..=n_max {
        let vals: Vec<LogValue> = q_grid
            .iter()
            .map(|&q| QReal::new(q).map(|q| rs_disc3(q, n)))
            .collect::<Result<_>>()?;
        let decreasing = vals.windows(2).all(|w| w[1].log_abs < w[0].log_abs);
        rep.push(Check::flag(format!("n={n} |D| decreasing toward q=1"), decreasing));
        if q_grid.len() >= 2 {
            let k = q_grid.len();
            let slope = (vals[k - 1].log_abs - vals[k - 2].log_abs)
                / ((1.0 - q_grid[k - 1]).ln() - (1.0 - q_grid[k - 2]).ln());
            let expect = (n * (n - 1) / 2) as f64;
            rep.push(Check::scaled(
                format!("n={n} log-log slope vs n(n-1)/2"),
                (slope - expect).abs(),
                expect,
                0.05,
            ));
        }
        let at = QReal::new(1.0 - 1e-3)?;
        let d = rs_disc3(at, n).log_abs.exp();
        rep.push(Check::new(format!("n={n} |D| at q=1-1e-3"), d, 1e-6));
    }
    let half = QReal::new(0.5)?;
    rep.push(Check::new(
        "rearranged form equals direct form (q=0.5, n=3)",
        rs_disc3(half, 3).rel_diff(rs_disc2(half, 3)),
        1e-12,
    ));
    let printed = rs_disc3_printed(half, 3).rel_diff(rs_disc2(half, 3));
    rep.note(format!("printed rearrangement differs from the direct form by {printed:.3e} (relative) at q=0.5, n=3"));
    Ok(rep)
}

/// One line of the discriminant table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscRow {
    pub family: String,
    pub params: String,
    pub n: usize,
    pub method: String,
    pub log_abs: f64,
    pub phase_re: f64,
    pub phase_im: f64,
    pub rel_agreement: f64,
}

impl DiscRow {
    pub fn from_pair(family: &str, pair: &DiscriminantPair) -> [DiscRow; 2] {
        let agree = pair.agreement();
        let row = |r: &DiscriminantResult| DiscRow {
            family: family.to_string(),
            params: r.params.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(";"),
            n: r.n,
            method: format!("{:?}", r.method),
            log_abs: r.value.log_abs,
            phase_re: r.value.phase.re,
            phase_im: r.value.phase.im,
            rel_agreement: agree,
        };
        [row(&pair.first), row(&pair.second)]
    }
}

pub fn write_disc_csv<W: Write>(rows: &[DiscRow], w: W) -> std::io::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for r in rows {
        out.serialize(r).map_err(std::io::Error::other)?;
    }
    out.flush()
}
