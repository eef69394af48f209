//! Trigonometric moments, quadrature on the circle, Toeplitz determinants
//! and the moment (Cholesky) construction of orthonormal systems.

use crate::engine::{OpucSystem, Route};
use crate::error::{OpucError, Result};
use crate::exec::Exec;
use crate::logval::LogValue;
use crate::poly::{ComplexPoly, ONE, ZERO};
use crate::special::{binomial, KahanSumC};
use crate::weight::WeightSpec;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Exponent `p` of the `sin^{2p}` node-clustering map used for singular weights.
pub const CLUSTER_ORDER: usize = 6;

/// Nodes `zeta_k = e^{i theta_k}` with masses `w(theta_k) dtheta_k`, so that
/// `int F w dtheta ~ sum_k mass_k F(zeta_k)`.
#[derive(Debug, Clone)]
pub struct QuadRule {
    pub theta: Vec<f64>,
    pub zeta: Vec<C64>,
    pub mass: Vec<f64>,
}

/// `theta = psi(s)` with `psi'(s) = 2^{2p} sin^{2p}(s) / C(2p, p)`; maps
/// `[0, 2pi)` onto itself and flattens the integrand at `s = 0, pi`.
pub fn cluster_map(s: f64, p: usize) -> (f64, f64) {
    let cpp = binomial(2 * p, p);
    let mut theta = s;
    for k in 1..=p {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let kf = k as f64;
        theta += 2.0 / cpp * sign * binomial(2 * p, p - k) * (2.0 * kf * s).sin() / (2.0 * kf);
    }
    let dpsi = (2.0 * s.sin()).powi(2 * p as i32) / cpp;
    (theta, dpsi)
}

/// Node `theta = base + eps` of the clustered rule, with `base` in
/// `{0, pi, 2 pi}` and `eps` carried to full relative precision.
#[derive(Debug, Clone, Copy)]
struct ClusterNode {
    base: f64,
    eps: f64,
    dpsi: f64,
}

/// Taylor coefficients of `(sin u / u)^{2p}` in powers of `u^2`.
fn sinc_power_series(p: usize, terms: usize) -> Vec<f64> {
    let mut sinc = vec![0.0; terms];
    let mut f = 1.0;
    for (j, c) in sinc.iter_mut().enumerate() {
        if j > 0 {
            f /= ((2 * j) * (2 * j + 1)) as f64;
        }
        *c = if j % 2 == 0 { f } else { -f };
    }
    let mut out = vec![0.0; terms];
    out[0] = 1.0;
    for _ in 0..2 * p {
        let mut next = vec![0.0; terms];
        for (i, &a) in out.iter().enumerate() {
            for (j, &b) in sinc.iter().enumerate().take(terms - i) {
                next[i + j] += a * b;
            }
        }
        out = next;
    }
    out
}

struct ClusterMap {
    p: usize,
    series: Vec<f64>,
}

impl ClusterMap {
    fn new(p: usize) -> Self {
        Self { p, series: sinc_power_series(p, 24) }
    }

    /// `psi(d)` for `|d| < 1` by the integrated series, free of cancellation.
    fn psi_small(&self, d: f64) -> f64 {
        let k = 2f64.powi(2 * self.p as i32) / binomial(2 * self.p, self.p);
        let d2 = d * d;
        let mut s = 0.0;
        let mut pw = d.powi(2 * self.p as i32 + 1);
        for (j, &c) in self.series.iter().enumerate() {
            s += c * pw / (2 * self.p + 2 * j + 1) as f64;
            pw *= d2;
        }
        k * s
    }

    fn node(&self, s: f64) -> ClusterNode {
        let (theta, dpsi) = cluster_map(s, self.p);
        let base = (s / PI).round() * PI;
        let d = s - base;
        let eps = if d.abs() < 1.0 { self.psi_small(d) } else { theta - base };
        ClusterNode { base, eps, dpsi }
    }
}

impl QuadRule {
    /// Periodic trapezoid rule with `m` nodes, clustered when the weight is singular.
    pub fn for_weight(w: &WeightSpec, m: usize) -> Result<Self> {
        let norm = w.normalization()?;
        let h = 2.0 * PI / m as f64;
        let map = if w.is_singular() { Some(ClusterMap::new(CLUSTER_ORDER)) } else { None };
        let mut theta = Vec::with_capacity(m);
        let mut zeta = Vec::with_capacity(m);
        let mut mass = Vec::with_capacity(m);
        for k in 0..m {
            let s = h * k as f64;
            let (th, z, dpsi) = match &map {
                Some(cm) => {
                    let nd = cm.node(s);
                    let e = C64::from_polar(1.0, nd.eps);
                    let z = if (nd.base - PI).abs() < 1.0 { -e } else { e };
                    (nd.base + nd.eps, z, nd.dpsi)
                }
                None => (s, C64::from_polar(1.0, s), 1.0),
            };
            let ms = if dpsi == 0.0 { 0.0 } else { norm * w.shape_at(z) * dpsi * h };
            theta.push(th);
            zeta.push(z);
            mass.push(ms);
        }
        Ok(Self { theta, zeta, mass })
    }

    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta.is_empty()
    }

    /// `int F w dtheta` in fixed node order.
    pub fn integrate<F: Fn(C64) -> C64>(&self, f: F) -> C64 {
        let mut s = KahanSumC::default();
        for (z, &m) in self.zeta.iter().zip(&self.mass) {
            if m != 0.0 {
                s.add(f(*z) * m);
            }
        }
        s.value()
    }
}

/// Default grid size for moments up to order `n`.
pub fn default_grid(w: &WeightSpec, n: usize) -> usize {
    if let Ok(s) = std::env::var("OPUC_GRID_M") {
        if let Ok(m) = s.trim().parse::<usize>() {
            return m.max(2 * n + 2);
        }
    }
    if w.is_singular() {
        4096usize.max(64 * n)
    } else {
        256usize.max(8 * n + 8)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentTable {
    /// `c_{-N} ... c_N`
    pub c: Vec<C64>,
    pub n: usize,
    pub grid_m: usize,
}

impl MomentTable {
    pub fn get(&self, j: i64) -> C64 {
        self.c[(j + self.n as i64) as usize]
    }

    pub fn from_nonneg(c: &[C64], grid_m: usize) -> Self {
        let n = c.len() - 1;
        let mut all: Vec<C64> = c[1..].iter().rev().map(|z| z.conj()).collect();
        all.extend_from_slice(c);
        Self { c: all, n, grid_m }
    }

    pub fn max_drift(&self, other: &MomentTable) -> f64 {
        let n = self.n.min(other.n) as i64;
        (-n..=n)
            .map(|j| (self.get(j) - other.get(j)).norm())
            .fold(0.0, f64::max)
    }
}

/// Moments `c_j`, `|j| <= n`, by an `m`-point trapezoid rule.
pub fn trig_moments(w: &WeightSpec, n: usize, m: usize) -> Result<MomentTable> {
    trig_moments_with(w, n, m, Exec::default())
}

pub fn trig_moments_with(w: &WeightSpec, n: usize, m: usize, exec: Exec) -> Result<MomentTable> {
    w.validate()?;
    if let WeightSpec::CustomMoments { moments } = w {
        if moments.len() < n + 1 {
            return Err(OpucError::Domain(format!(
                "custom weight provides {} moments, {} needed",
                moments.len(),
                n + 1
            )));
        }
        let c0 = moments[0].re;
        let c: Vec<C64> = moments[..=n].iter().map(|z| z / c0).collect();
        return Ok(MomentTable::from_nonneg(&c, 0));
    }
    if m < 2 * n + 2 {
        return Err(OpucError::GridTooCoarse { m, n });
    }
    let rule = QuadRule::for_weight(w, m)?;
    let js: Vec<i64> = (-(n as i64)..=n as i64).collect();
    let c = exec.map(&js, |&j| {
        let mut s = KahanSumC::default();
        for (th, &ms) in rule.theta.iter().zip(&rule.mass) {
            if ms != 0.0 {
                s.add(C64::from_polar(ms, -(j as f64) * th));
            }
        }
        s.value()
    });
    Ok(MomentTable { c, n, grid_m: m })
}

/// Moments with grid doubling until successive tables agree to `1e-12`.
pub fn trig_moments_converged(w: &WeightSpec, n: usize) -> Result<MomentTable> {
    let mut m = default_grid(w, n);
    let mut cur = trig_moments(w, n, m)?;
    if !w.has_density() {
        return Ok(cur);
    }
    let mut drift = f64::INFINITY;
    for _ in 0..4 {
        m *= 2;
        let next = trig_moments(w, n, m)?;
        drift = cur.max_drift(&next);
        cur = next;
        if drift < 1e-12 {
            return Ok(cur);
        }
    }
    Err(OpucError::QuadratureNotConverged { drift })
}

pub(crate) fn lu_logdet(mut a: Vec<Vec<C64>>) -> Result<LogValue> {
    let n = a.len();
    let mut det = LogValue::ONE;
    for k in 0..n {
        let (p, pv) = (k..n)
            .map(|i| (i, a[i][k].norm()))
            .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if pv < 1e-300 {
            return Err(OpucError::SingularMatrix { step: k, pivot: pv });
        }
        if p != k {
            a.swap(p, k);
            det.phase = -det.phase;
        }
        let piv = a[k][k];
        det = det.mul_c(piv);
        for i in k + 1..n {
            let f = a[i][k] / piv;
            if f != ZERO {
                for j in k..n {
                    let t = a[k][j];
                    a[i][j] -= f * t;
                }
            }
        }
    }
    Ok(det)
}

/// Determinant of the `n x n` Toeplitz matrix `(c_{j-k})`.
pub fn toeplitz_det(m: &MomentTable, n: usize) -> Result<LogValue> {
    if n > m.n + 1 {
        return Err(OpucError::Domain(format!("order {n} exceeds moment table {}", m.n)));
    }
    let a = (0..n)
        .map(|j| (0..n).map(|k| m.get(j as i64 - k as i64)).collect())
        .collect();
    lu_logdet(a)
}

/// Orthonormal system by Cholesky factorization `G = L L^H` of the Gram
/// matrix `G_{jk} = (z^j, z^k) = c_{k-j}`; row `n` of `L^{-1}` holds `phi_n`.
pub fn system_from_moments(m: &MomentTable, n_max: usize, weight: WeightSpec) -> Result<OpucSystem> {
    if n_max > m.n {
        return Err(OpucError::Domain(format!(
            "degree {n_max} needs moments up to {n_max}, table has {}",
            m.n
        )));
    }
    let n = n_max + 1;
    let g = |j: usize, k: usize| m.get(k as i64 - j as i64);
    let mut l = vec![vec![ZERO; n]; n];
    for j in 0..n {
        let mut d = g(j, j);
        for k in 0..j {
            d -= l[j][k] * l[j][k].conj();
        }
        if !(d.re > 0.0) || !d.re.is_finite() {
            return Err(OpucError::NotPositiveDefinite { order: j + 1 });
        }
        let ljj = d.re.sqrt();
        l[j][j] = C64::new(ljj, 0.0);
        for i in j + 1..n {
            let mut s = g(i, j);
            for k in 0..j {
                s -= l[i][k] * l[j][k].conj();
            }
            l[i][j] = s / ljj;
        }
    }
    let mut inv = vec![vec![ZERO; n]; n];
    for i in 0..n {
        inv[i][i] = ONE / l[i][i];
        for j in (0..i).rev() {
            let mut s = ZERO;
            for k in j + 1..=i {
                s += l[k][j] * inv[i][k];
            }
            inv[i][j] = -s / l[j][j];
        }
    }
    let phi = inv
        .into_iter()
        .enumerate()
        .map(|(i, row)| ComplexPoly::new(row[..=i].to_vec()))
        .collect();
    OpucSystem::from_polys(phi, weight, Route::Moments)
}

/// `(f, g) = sum_{j,k} f_j conj(g_k) c_{k-j}`
pub fn inner_product_moments(f: &ComplexPoly, g: &ComplexPoly, m: &MomentTable) -> C64 {
    let mut s = KahanSumC::default();
    for (j, &fj) in f.coeffs().iter().enumerate() {
        for (k, &gk) in g.coeffs().iter().enumerate() {
            s.add(fj * gk.conj() * m.get(k as i64 - j as i64));
        }
    }
    s.value()
}

/// `(f, g) = int f conj(g) w dtheta` by quadrature on a given rule.
pub fn inner_product_rule(f: &ComplexPoly, g: &ComplexPoly, rule: &QuadRule) -> C64 {
    rule.integrate(|z| f.eval(z) * g.eval(z).conj())
}

/// `(f, g)` under `w`; quadrature for weights with a density, moments otherwise.
pub fn inner_product(f: &ComplexPoly, g: &ComplexPoly, w: &WeightSpec) -> Result<C64> {
    let deg = f.degree().max(g.degree());
    if w.has_density() {
        let m = default_grid(w, deg).max(4 * deg + 64);
        let rule = QuadRule::for_weight(w, m)?;
        Ok(inner_product_rule(f, g, &rule))
    } else {
        let m = trig_moments(w, deg, 0)?;
        Ok(inner_product_moments(f, g, &m))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::bessel_i;

    #[test]
    fn cluster_map_endpoints() {
        for p in 1..8 {
            let (t0, d0) = cluster_map(0.0, p);
            let (tp, _) = cluster_map(PI, p);
            let (t2, _) = cluster_map(2.0 * PI, p);
            assert_eq!((t0, d0), (0.0, 0.0));
            assert!((tp - PI).abs() < 1e-14 && (t2 - 2.0 * PI).abs() < 1e-14);
            let s = 1.1;
            let h = 1e-5;
            let fd = (cluster_map(s + h, p).0 - cluster_map(s - h, p).0) / (2.0 * h);
            assert!((fd - cluster_map(s, p).1).abs() < 1e-8);
        }
    }

    #[test]
    fn cluster_offsets_are_accurate() {
        let cm = ClusterMap::new(CLUSTER_ORDER);
        for &d in &[0.9, 0.5, 0.1] {
            let direct = cluster_map(d, CLUSTER_ORDER).0;
            assert!((cm.psi_small(d) - direct).abs() <= 1e-15, "{d}");
        }
        let tiny: f64 = 1e-3;
        let lead = 2f64.powi(12) / binomial(12, 6) * tiny.powi(13) / 13.0;
        assert!((cm.psi_small(tiny) / lead - 1.0).abs() < 1e-5);
        let nd = cm.node(PI + tiny);
        assert_eq!(nd.base, PI);
        assert!((nd.eps / lead - 1.0).abs() < 1e-5);
    }

    #[test]
    fn lebesgue_moments() {
        let m = trig_moments(&WeightSpec::Lebesgue, 6, 256).unwrap();
        assert!((m.get(0) - ONE).norm() < 1e-15);
        for j in 1..=6 {
            assert!(m.get(j).norm() < 1e-15 && m.get(-j).norm() < 1e-15);
        }
        assert!(matches!(
            trig_moments(&WeightSpec::Lebesgue, 10, 20),
            Err(OpucError::GridTooCoarse { .. })
        ));
    }

    #[test]
    fn normalization_by_quadrature() {
        let ws = [
            WeightSpec::Lebesgue,
            WeightSpec::CircularJacobi { a: 0.5 },
            WeightSpec::CircularJacobi { a: 1.0 },
            WeightSpec::CircularJacobi { a: 2.5 },
            WeightSpec::Szego { a: 1.0, b: 0.5 },
            WeightSpec::Szego { a: 0.5, b: 0.5 },
            WeightSpec::Szego { a: 1.3, b: 0.2 },
            WeightSpec::ModifiedBessel { t: 2.0 },
            WeightSpec::RogersSzego { q: 0.2 },
            WeightSpec::RogersSzego { q: 0.8 },
        ];
        for w in &ws {
            let m = trig_moments_converged(w, 4).unwrap();
            assert!((m.get(0) - ONE).norm() < 1e-12, "{w:?} c0 = {}", m.get(0));
        }
    }

    #[test]
    fn moments_match_closed_forms() {
        let ws = [
            WeightSpec::CircularJacobi { a: 0.5 },
            WeightSpec::CircularJacobi { a: 1.0 },
            WeightSpec::CircularJacobi { a: 0.75 },
            WeightSpec::ModifiedBessel { t: 1.0 },
            WeightSpec::RogersSzego { q: 0.5 },
            WeightSpec::RogersSzego { q: 0.8 },
        ];
        for w in &ws {
            let m = trig_moments_converged(w, 12).unwrap();
            for j in -12..=12 {
                let e = w.exact_moment(j).unwrap();
                assert!((m.get(j) - e).norm() < 1e-12, "{w:?} j={j}: {} vs {}", m.get(j), e);
            }
        }
    }

    #[test]
    fn bessel_moments_and_inner_product() {
        let t = 1.0;
        let w = WeightSpec::ModifiedBessel { t };
        let m = trig_moments(&w, 3, 256).unwrap();
        let r = bessel_i(1, t).unwrap() / bessel_i(0, t).unwrap();
        assert!((m.get(1).re - r).abs() < 1e-15);
        let z = ComplexPoly::monomial(1, ONE);
        let one = ComplexPoly::constant(ONE);
        let ip = inner_product(&z, &one, &w).unwrap();
        assert!((ip - C64::new(r, 0.0)).norm() < 1e-14);
        assert!((inner_product(&one, &one, &w).unwrap() - ONE).norm() < 1e-14);
    }

    #[test]
    fn toeplitz_small_orders() {
        let w = WeightSpec::ModifiedBessel { t: 1.0 };
        let m = trig_moments(&w, 4, 256).unwrap();
        assert_eq!(toeplitz_det(&m, 0).unwrap(), LogValue::ONE);
        let d1 = toeplitz_det(&m, 1).unwrap().to_complex().unwrap();
        assert!((d1 - ONE).norm() < 1e-15);
        let i0 = bessel_i(0, 1.0).unwrap();
        let i1 = bessel_i(1, 1.0).unwrap();
        let d2 = toeplitz_det(&m, 2).unwrap().to_complex().unwrap();
        let expect = (i0 * i0 - i1 * i1) / (i0 * i0);
        assert!((d2.re - expect).abs() < 1e-14);
        for n in 1..=5 {
            let d = toeplitz_det(&m, n.min(5)).unwrap();
            assert!((d.phase - ONE).norm() < 1e-10);
        }
    }

    #[test]
    fn lebesgue_system_is_monomials() {
        let m = trig_moments(&WeightSpec::Lebesgue, 6, 256).unwrap();
        let s = system_from_moments(&m, 6, WeightSpec::Lebesgue).unwrap();
        for n in 0..=6 {
            assert!(s.phi(n).rel_diff(&ComplexPoly::monomial(n, ONE)) < 1e-14);
        }
    }

    #[test]
    fn moment_system_is_orthonormal() {
        let w = WeightSpec::Szego { a: 1.0, b: 0.5 };
        let m = trig_moments_converged(&w, 10).unwrap();
        let s = system_from_moments(&m, 10, w.clone()).unwrap();
        for i in 0..=10 {
            for j in 0..=10 {
                let ip = inner_product_moments(s.phi(i), s.phi(j), &m);
                let e = if i == j { ONE } else { ZERO };
                assert!((ip - e).norm() < 1e-11);
                let back = inner_product_moments(s.phi(j), s.phi(i), &m);
                assert!((ip - back.conj()).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn indefinite_moments_rejected() {
        let w = WeightSpec::CustomMoments {
            moments: vec![ONE, C64::new(1.5, 0.0)],
        };
        let m = trig_moments(&w, 1, 0).unwrap();
        assert!(matches!(
            system_from_moments(&m, 1, w),
            Err(OpucError::NotPositiveDefinite { order: 2 })
        ));
    }
}
