//! Named verification suites. Each one takes a weight and a maximal index
//! and returns a [`VerificationReport`] of residual checks.

use crate::disc::{
    cj_delta, delta, disc_sylvester, discriminant, generalized_discriminant, generalized_discriminant_brute,
    q_discriminant, rs_disc, rs_disc2, rs_disc_q_limit, sz_delta, DiscOperator,
};
use crate::engine::{coeff_residual, random_reflections, OpucSystem, Route};
use crate::error::{OpucError, Result};
use crate::exec::Exec;
use crate::families::{
    build_system, cj_ode_pq, closed_ladder, closed_q_ladder, mb_coefficient_odes, mb_dpii, mb_dpii_extend_f64,
    mb_dpii_residual, mb_first_members, mb_reduction_residual, mb_rn_ode_integrate, mb_system_toeplitz,
    reference_system, rs_h, rs_system, sz_ode_pq, Field, RsField,
};
use crate::ladder::{
    ab_new_residual, adjoint_residual, circle_samples, default_samples, functional_equation_residual,
    ladder_numeric, low_order_residual, lowering_residual, ode_coefficients, ode_coefficients_alt,
    ode_residual, q_adjoint_residual, q_fe_diff_residual, q_functional_equation_residual, q_ladder_numeric,
    q_lowering_residual, q_raising_residual, raising_residual, ExternalField, Ladder, LadderPair, QQuadLadder,
    QuadLadder,
};
use crate::moments::{system_from_moments, trig_moments};
use crate::poly::{ComplexPoly, QReal};
use crate::report::{Check, VerificationReport};
use crate::weight::WeightSpec;
use crate::zeros::{
    assert_in_disk, cj_q_values, cj_stationarity_residual, cj_t_function, ode_at_zeros_residual, q_from_p, roots,
    spread, stationarity_residual, sz_stationarity_residual, t_function, DISK_MARGIN,
};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

/// Tolerances of the checks.
pub mod tol {
    pub const RECURRENCE: f64 = 1e-11;
    pub const ROUTES: f64 = 1e-9;
    pub const CD: f64 = 1e-11;
    pub const LADDER_MATCH: f64 = 1e-8;
    pub const LOWERING: f64 = 1e-9;
    pub const RAISING: f64 = 1e-9;
    pub const ODE: f64 = 1e-7;
    pub const ODE_COEFF: f64 = 1e-8;
    pub const FUNCTIONAL_EQ: f64 = 1e-9;
    pub const Q_LOWERING_COEFF: f64 = 1e-13;
    pub const Q_LADDER_MATCH: f64 = 1e-9;
    pub const DPII: f64 = 1e-8;
    pub const DYNAMICS: f64 = 1e-6;
    pub const ROOT_RESIDUAL: f64 = 1e-12;
    pub const RECONSTRUCTION: f64 = 1e-10;
    pub const STATIONARITY: f64 = 1e-7;
    pub const TWO_BODY: f64 = 1e-10;
    pub const CONSTANT_Q: f64 = 1e-7;
    pub const T_RATIO: f64 = 1e-12;
    pub const DELTA: f64 = 1e-8;
    pub const FAMILY_DELTA: f64 = 1e-10;
    pub const GEN_DISC: f64 = 1e-8;
    pub const RESULTANT: f64 = 1e-9;
    pub const Q_DISC: f64 = 1e-8;
    pub const Q_DISC_FORMS: f64 = 1e-11;
    pub const ADJOINT: f64 = 1e-8;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Recurrences,
    Routes,
    Cd,
    Ladder,
    Ode,
    FunctionalEq,
    QLadder,
    QFunctionalEq,
    Dpii,
    RnOde,
    ZerosStationarity,
    Delta,
    GenDisc,
    QDisc,
    QDiscLimit,
    Adjoint,
}

impl Suite {
    pub const ALL: [Suite; 16] = [
        Suite::Recurrences,
        Suite::Routes,
        Suite::Cd,
        Suite::Ladder,
        Suite::Ode,
        Suite::FunctionalEq,
        Suite::QLadder,
        Suite::QFunctionalEq,
        Suite::Dpii,
        Suite::RnOde,
        Suite::ZerosStationarity,
        Suite::Delta,
        Suite::GenDisc,
        Suite::QDisc,
        Suite::QDiscLimit,
        Suite::Adjoint,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Recurrences => "recurrences",
            Suite::Routes => "routes",
            Suite::Cd => "cd",
            Suite::Ladder => "ladder",
            Suite::Ode => "ode",
            Suite::FunctionalEq => "functional-eq",
            Suite::QLadder => "q-ladder",
            Suite::QFunctionalEq => "q-functional-eq",
            Suite::Dpii => "dpii",
            Suite::RnOde => "rn-ode",
            Suite::ZerosStationarity => "zeros-stationarity",
            Suite::Delta => "delta",
            Suite::GenDisc => "gen-disc",
            Suite::QDisc => "q-disc",
            Suite::QDiscLimit => "q-disc-limit",
            Suite::Adjoint => "adjoint",
        }
    }

    /// Name of the identity the suite checks.
    pub fn anchor(self) -> &'static str {
        match self {
            Suite::Recurrences => "szego-recurrences",
            Suite::Routes => "construction-route-equivalence",
            Suite::Cd => "christoffel-darboux",
            Suite::Ladder => "ladder-operators",
            Suite::Ode => "second-order-equation",
            Suite::FunctionalEq => "ladder-functional-equation",
            Suite::QLadder => "q-ladder-operators",
            Suite::QFunctionalEq => "q-ladder-functional-equation",
            Suite::Dpii => "discrete-painleve-ii",
            Suite::RnOde => "bessel-coefficient-dynamics",
            Suite::ZerosStationarity => "electrostatic-stationarity",
            Suite::Delta => "schur-product-lemma",
            Suite::GenDisc => "generalized-discriminant",
            Suite::QDisc => "q-discriminant",
            Suite::QDiscLimit => "rogers-szego-discriminant-limit",
            Suite::Adjoint => "ladder-adjoint",
        }
    }

    pub fn explain(self) -> &'static str {
        match self {
            Suite::Recurrences => {
                "Both Szegő recurrences, the three-term recurrence, kappa_n^2 = sum |phi_k(0)|^2, \
                 the kappa/l recurrence and the sum formula for l_n, coefficientwise. \
                 Weight 'unspecified' draws random reflection coefficients with |r_n| <= 0.9."
            }
            Suite::Routes => {
                "Closed-form, Szegő-recurrence and moment-quadrature constructions of phi_0..phi_N agree coefficientwise."
            }
            Suite::Cd => "Christoffel–Darboux kernel: direct sum against the closed form at 32 random points of the disk.",
            Suite::Ladder => {
                "A_n, B_n from the integral representation match the closed forms at 16 points of |z| = 1/2; \
                 lowering phi_n' = A_n phi_{n-1} - B_n phi_n and the raising relation hold for both."
            }
            Suite::Ode => {
                "Second-order equation for phi_n from either elimination order: residuals, agreement of the two \
                 P coefficients, and the family closed forms of P and Q."
            }
            Suite::FunctionalEq => {
                "B_n + B_{n-1} - (k_{n-1}/k_{n-2}) A_{n-1}/z - (k_n/k_{n-2})(phi_{n-1}(0)/phi_n(0)) A_{n-1} \
                 = -(n-1)/z - v'(z); the constant recovered at n = 1; the modified-Bessel reduction to t/2."
            }
            Suite::QLadder => {
                "Rogers–Szegő: D_q phi_n = A_n phi_{n-1} coefficientwise with A_n = sqrt(1-q^n)/(1-q), B_n = 0; \
                 the integral representation reproduces it; q-raising relation."
            }
            Suite::QFunctionalEq => "Rogers–Szegő: the q functional equation and its difference form.",
            Suite::Dpii => {
                "Modified Bessel: Toeplitz reflection coefficients satisfy -(2n/t) r_n/(1-r_n^2) = r_{n+1} + r_{n-1}, \
                 and the forward recurrence reproduces them."
            }
            Suite::RnOde => {
                "Modified Bessel: t-derivatives of kappa_n, phi_n(0), r_n and phi_n by central differences; \
                 RK4 solution of the second-order equation for r_n; kappa_n^2 from the t-integral."
            }
            Suite::ZerosStationarity => {
                "Zeros of phi_n lie in the open unit disk and are stationary points of \
                 T = prod z_j^{1-n} e^{-v(z_j)}/A_n(z_j) prod (z_j - z_k)^2; constant Q of the family equations."
            }
            Suite::Delta => "Delta_n = prod phi_{n-1}(z_{j,n}) against its closed form and the family formulas.",
            Suite::GenDisc => {
                "D(phi_n, T) = (-1)^{n(n-1)/2} gamma^{n-2} prod (T phi_n)(z_j) against the closed form through \
                 A_n at the zeros, for T = d/dz or D_q; root-product, resultant and Sylvester discriminants."
            }
            Suite::QDisc => {
                "Rogers–Szegő q-discriminants of phi_n and H_n against their closed forms; the two product forms; \
                 the classical limit q -> 1 on a random quadratic."
            }
            Suite::QDiscLimit => {
                "D(H_n, q) as q -> 1: monotone decay, log-log slope n(n-1)/2, the threshold |D| < 1e-6 at q = 0.999, \
                 and the rearranged form against the direct one."
            }
            Suite::Adjoint => {
                "(L f, g) = (f, L* g) for L = d/dz + B_n, L* g = z^2 g' + z g + conj(v' + B_n) g, and its D_q analogue; \
                 inner product int f conj(g) w dtheta."
            }
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = OpucError;
    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .iter()
            .copied()
            .find(|x| x.name() == s)
            .ok_or_else(|| OpucError::Domain(format!("unknown suite '{s}'")))
    }
}

/// One suite invocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteInput {
    pub weight: WeightSpec,
    pub n: usize,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SuiteOptions {
    /// Quadrature grid override.
    pub grid_m: Option<usize>,
    pub exec: Exec,
}

struct Ctx<'a> {
    input: &'a SuiteInput,
    opts: &'a SuiteOptions,
    rep: VerificationReport,
}

impl Ctx<'_> {
    fn check(&mut self, name: impl Into<String>, residual: f64, tolerance: f64) {
        self.rep.push(Check::new(name, residual, tolerance));
    }

    fn flag(&mut self, name: impl Into<String>, holds: bool) {
        self.rep.push(Check::flag(name, holds));
    }

    fn note(&mut self, s: impl Into<String>) {
        self.rep.note(s);
    }

    fn w(&self) -> &WeightSpec {
        &self.input.weight
    }

    fn n(&self) -> usize {
        self.input.n
    }

    fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.input.seed)
    }

    fn quad_ladder<'s>(&self, sys: &'s OpucSystem, field: &'s dyn ExternalField) -> Result<QuadLadder<'s>> {
        match self.opts.grid_m {
            Some(m) => QuadLadder::with_grid(sys, field, m),
            None => QuadLadder::new(sys, field),
        }
    }
}

/// Running maximum that remembers where it was attained.
#[derive(Default)]
struct Worst {
    v: f64,
    at: Option<usize>,
}

impl Worst {
    fn add(&mut self, n: usize, r: f64) {
        if self.at.is_none() || r > self.v || r.is_nan() {
            self.v = r;
            self.at = Some(n);
        }
    }

    fn label(&self, name: &str) -> String {
        match self.at {
            Some(n) => format!("{name} (worst at n={n})"),
            None => name.to_string(),
        }
    }
}

fn push_worst(cx: &mut Ctx<'_>, name: &str, w: &Worst, tolerance: f64) {
    if w.at.is_some() {
        cx.check(w.label(name), w.v, tolerance);
    }
}

pub fn run_suite(suite: Suite, input: &SuiteInput, opts: &SuiteOptions) -> Result<VerificationReport> {
    input.weight.validate()?;
    let start = Instant::now();
    let mut rep = VerificationReport::new(suite.name(), suite.anchor(), input.weight.name());
    rep.params = input.weight.params();
    rep.params.insert("n".into(), input.n as f64);
    let mut cx = Ctx { input, opts, rep };
    match suite {
        Suite::Recurrences => recurrences(&mut cx)?,
        Suite::Routes => routes(&mut cx)?,
        Suite::Cd => cd(&mut cx)?,
        Suite::Ladder => ladder(&mut cx)?,
        Suite::Ode => ode(&mut cx)?,
        Suite::FunctionalEq => functional_eq(&mut cx)?,
        Suite::QLadder => q_ladder(&mut cx)?,
        Suite::QFunctionalEq => q_functional_eq(&mut cx)?,
        Suite::Dpii => dpii(&mut cx)?,
        Suite::RnOde => rn_ode(&mut cx)?,
        Suite::ZerosStationarity => zeros_stationarity(&mut cx)?,
        Suite::Delta => delta_suite(&mut cx)?,
        Suite::GenDisc => gen_disc(&mut cx)?,
        Suite::QDisc => q_disc(&mut cx)?,
        Suite::QDiscLimit => q_disc_limit(&mut cx)?,
        Suite::Adjoint => adjoint(&mut cx)?,
    }
    let mut rep = cx.rep;
    rep.runtime_ms = start.elapsed().as_millis() as u64;
    Ok(rep)
}

fn need_n(cx: &Ctx<'_>, min: usize) -> Result<()> {
    if cx.n() < min {
        return Err(OpucError::Domain(format!("suite needs n >= {min}")));
    }
    Ok(())
}

/// Reference system, or random reflections for an unspecified weight.
fn system(cx: &mut Ctx<'_>, n_max: usize) -> Result<OpucSystem> {
    match cx.w() {
        WeightSpec::Unspecified => {
            cx.rep.params.insert("seed".into(), cx.input.seed as f64);
            OpucSystem::build_from_reflections(&random_reflections(n_max, 0.9, cx.input.seed))
        }
        w => reference_system(w, n_max),
    }
}

fn classical(cx: &Ctx<'_>) -> Result<Field> {
    Field::for_weight(cx.w()).map_err(|_| {
        OpucError::NoLadderForOperator(format!("d/dz on weight '{}'", cx.w().name()))
    })
}

fn rs_q(cx: &Ctx<'_>) -> Result<QReal> {
    match *cx.w() {
        WeightSpec::RogersSzego { q } => QReal::new(q),
        _ => Err(OpucError::NoLadderForOperator(format!("D_q on weight '{}'", cx.w().name()))),
    }
}

fn mb_t(cx: &Ctx<'_>) -> Result<f64> {
    match *cx.w() {
        WeightSpec::ModifiedBessel { t } if t != 0.0 => Ok(t),
        _ => Err(OpucError::Domain(format!("suite needs the modified Bessel weight with t != 0, got '{}'", cx.w().name()))),
    }
}

// ------------------------------------------------------------------ suites

fn recurrences(cx: &mut Ctx<'_>) -> Result<()> {
    need_n(cx, 1)?;
    let sys = system(cx, cx.n())?;
    let inv = sys.invariant_residuals();
    cx.check("kappa_n z phi_n = kappa_{n+1} phi_{n+1} - phi_{n+1}(0) phi*_{n+1}", inv.rec1, tol::RECURRENCE);
    cx.check("kappa_n phi_{n+1} = kappa_{n+1} z phi_n + phi_{n+1}(0) phi*_n", inv.rec2, tol::RECURRENCE);
    cx.check("kappa_n^2 = sum |phi_k(0)|^2", inv.k, tol::RECURRENCE);
    cx.check("kappa/l recurrence", inv.kl, tol::RECURRENCE);
    cx.check("l_n sum formula", inv.l, tol::RECURRENCE);
    cx.check("stored reciprocal polynomials", inv.star, tol::RECURRENCE);
    cx.flag("|r_n| < 1", inv.max_reflection < 1.0);
    let zs = default_samples();
    let mut w = Worst::default();
    let mut skipped = 0;
    for n in 1..cx.n() {
        match sys.three_term_residual(n, &zs) {
            Ok(r) => w.add(n, r),
            Err(OpucError::DegenerateReflection { .. }) => skipped += 1,
            Err(e) => return Err(e),
        }
    }
    push_worst(cx, "three-term recurrence", &w, tol::RECURRENCE);
    if skipped > 0 {
        cx.note(format!("three-term recurrence skipped at {skipped} indices with phi_n(0) = 0"));
    }
    Ok(())
}

fn routes(cx: &mut Ctx<'_>) -> Result<()> {
    need_n(cx, 1)?;
    let (w, n) = (cx.w().clone(), cx.n());
    let closed = build_system(&w, n, Route::ClosedForm)?;
    let rec = build_system(&w, n, Route::SzegoRecurrence)?;
    let mom = match cx.opts.grid_m {
        Some(m) => system_from_moments(&trig_moments(&w, n, m)?, n, w.clone())?,
        None => build_system(&w, n, Route::Moments)?,
    };
    cx.check("closed form vs Szegő recurrence", closed.rel_diff(&rec, n), tol::ROUTES);
    cx.check("closed form vs moments", closed.rel_diff(&mom, n), tol::ROUTES);
    cx.check("Szegő recurrence vs moments", rec.rel_diff(&mom, n), tol::ROUTES);
    Ok(())
}

fn random_in_disk(rng: &mut ChaCha8Rng, rmax: f64) -> C64 {
    let r = rmax * rng.gen::<f64>().sqrt();
    C64::from_polar(r, rng.gen_range(0.0..std::f64::consts::TAU))
}

fn cd(cx: &mut Ctx<'_>) -> Result<()> {
    need_n(cx, 1)?;
    let sys = system(cx, cx.n())?;
    let mut rng = cx.rng();
    let pairs: Vec<(C64, C64)> = (0..32)
        .map(|_| (random_in_disk(&mut rng, 0.95), random_in_disk(&mut rng, 0.95)))
        .collect();
    let mut w = Worst::default();
    for n in 0..cx.n() {
        for &(a, z) in &pairs {
            w.add(n, sys.cd_residual(n, a, z)?);
        }
    }
    push_worst(cx, "Christoffel–Darboux kernel, 32 random pairs", &w, tol::CD);
    Ok(())
}

fn pair_gap(p: &LadderPair, q: &LadderPair, zs: &[C64]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for &z in zs {
        let (a0, b0) = p.ab(z)?;
        let (a1, b1) = q.ab(z)?;
        worst = worst
            .max((a1 - a0).norm() / a0.norm().max(1.0))
            .max((b1 - b0).norm() / b0.norm().max(1.0));
    }
    Ok(worst)
}

fn ladder(cx: &mut Ctx<'_>) -> Result<()> {
    need_n(cx, 1)?;
    let field = classical(cx)?;
    let w = cx.w().clone();
    let sys = reference_system(&w, cx.n() + 1)?;
    let closed = closed_ladder(&w, &sys)?;
    let quad = cx.quad_ladder(&sys, &field)?;
    let zs = default_samples();
    let (mut gap, mut low_c, mut low_q, mut rai_c, mut rai_q) =
        (Worst::default(), Worst::default(), Worst::default(), Worst::default(), Worst::default());
    for n in 1..=cx.n() {
        let pc = closed.pair(n, &zs)?;
        let pq = match cx.opts.grid_m {
            Some(_) => quad.pair(n, &zs)?,
            None => ladder_numeric(&sys, &field, n, &zs)?,
        };
        gap.add(n, pair_gap(&pc, &pq, &zs)?);
        low_c.add(n, lowering_residual(&sys, &pc, &zs)?);
        low_q.add(n, lowering_residual(&sys, &pq, &zs)?);
        if n >= 2 {
            rai_c.add(n, raising_residual(&sys, closed.as_ref(), n, &zs)?);
            rai_q.add(n, raising_residual(&sys, &quad, n, &zs)?);
        }
    }
    push_worst(cx, "integral A_n, B_n vs closed form", &gap, tol::LADDER_MATCH);
    push_worst(cx, "lowering, closed form", &low_c, tol::LOWERING);
    push_worst(cx, "lowering, integral form", &low_q, tol::LOWERING);
    push_worst(cx, "raising, closed form", &rai_c, tol::RAISING);
    push_worst(cx, "raising, integral form", &rai_q, tol::RAISING);
    Ok(())
}

fn max_gap(a: &[C64], b: &[C64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm() / y.norm().max(1.0))
        .fold(0.0, f64::max)
}

fn ode(cx: &mut Ctx<'_>) -> Result<()> {
    need_n(cx, 2)?;
    classical(cx)?;
    let w = cx.w().clone();
    let sys = reference_system(&w, cx.n() + 2)?;
    let lad = closed_ladder(&w, &sys)?;
    let zs = default_samples();
    let (mut r1, mut r2, mut pp, mut fp, mut fq) =
        (Worst::default(), Worst::default(), Worst::default(), Worst::default(), Worst::default());
    for n in 2..=cx.n() {
        let (p1, q1) = ode_coefficients(lad.as_ref(), &sys, n, &zs)?;
        let (p2, q2) = ode_coefficients_alt(lad.as_ref(), &sys, n, &zs)?;
        r1.add(n, ode_residual(&sys, n, &p1, &q1));
        r2.add(n, ode_residual(&sys, n, &p2, &q2));
        pp.add(n, max_gap(&p1.values, &p2.values));
        let fam: Option<Vec<(C64, C64)>> = match w {
            WeightSpec::CircularJacobi { a } => Some(zs.iter().map(|&z| cj_ode_pq(a, n, z)).collect()),
            WeightSpec::Szego { a, b } => Some(zs.iter().map(|&z| sz_ode_pq(a, b, n, z)).collect()),
            _ => None,
        };
        if let Some(f) = fam {
            let (p, q): (Vec<C64>, Vec<C64>) = f.into_iter().unzip();
            fp.add(n, max_gap(&p1.values, &p));
            fq.add(n, max_gap(&q1.values, &q));
        }
    }
    push_worst(cx, "equation from indices n, n-1", &r1, tol::ODE);
    push_worst(cx, "equation from indices n, n+1", &r2, tol::ODE);
    push_worst(cx, "P agrees between the two eliminations", &pp, tol::ODE_COEFF);
    push_worst(cx, "P matches the family closed form", &fp, tol::ODE_COEFF);
    push_worst(cx, "Q matches the family closed form", &fq, tol::ODE_COEFF);
    Ok(())
}

/// Largest index at which the modified-Bessel integral ladder is resolved
/// well enough to divide by `phi_n(0)`.
const MB_QUAD_MAX_N: usize = 6;

fn functional_eq(cx: &mut Ctx<'_>) -> Result<()> {
    need_n(cx, 2)?;
    let field = classical(cx)?;
    let w = cx.w().clone();
    let sys = reference_system(&w, cx.n() + 1)?;
    let lad = closed_ladder(&w, &sys)?;
    let quad = cx.quad_ladder(&sys, &field)?;
    let zs = default_samples();
    let (mut fe, mut fq, mut red) = (Worst::default(), Worst::default(), Worst::default());
    for n in 2..=cx.n() {
        fe.add(n, functional_equation_residual(&sys, lad.as_ref(), &field, n, &zs)?);
        if !matches!(w, WeightSpec::ModifiedBessel { .. }) || n <= MB_QUAD_MAX_N {
            fq.add(n, functional_equation_residual(&sys, &quad, &field, n, &zs)?);
        }
        if let WeightSpec::ModifiedBessel { t } = w {
            red.add(n, mb_reduction_residual(&sys, t, n)?);
        }
    }
    push_worst(cx, "functional equation, closed-form ladder", &fe, tol::FUNCTIONAL_EQ);
    push_worst(cx, "functional equation, integral ladder", &fq, tol::FUNCTIONAL_EQ);
    if matches!(w, WeightSpec::ModifiedBessel { .. }) && cx.n() > MB_QUAD_MAX_N {
        cx.note(format!("integral ladder checked up to n = {MB_QUAD_MAX_N}: phi_n(0) underflows the quadrature beyond"));
    }
    push_worst(cx, "trailing terms reduce to t/2", &red, tol::FUNCTIONAL_EQ);
    cx.check("n = 1 constant equals -v'(z)", ab_new_residual(&sys, &quad, &zs)?, tol::FUNCTIONAL_EQ);
    cx.check("n = 1 lowering with the M_1 seed", low_order_residual(&sys, &quad, &zs)?, tol::FUNCTIONAL_EQ);
    Ok(())
}

fn q_ladder(cx: &mut Ctx<'_>) -> Result<()> {
    need_n(cx, 1)?;
    let q = rs_q(cx)?;
    let field = RsField { q };
    let sys = rs_system(q, cx.n() + 1)?;
    let lad = closed_q_ladder(cx.w())?;
    let quad = QQuadLadder::new(&sys, &field)?;
    let zs = default_samples();
    let (mut coef, mut num, mut low, mut rai_c, mut rai_q) =
        (Worst::default(), Worst::default(), Worst::default(), Worst::default(), Worst::default());
    for n in 1..=cx.n() {
        let pc = lad.pair(n, &zs)?;
        let (a, _) = lad.ab(n, C64::new(0.0, 0.0))?;
        coef.add(n, coeff_residual(&[sys.phi(n).q_difference(q), sys.phi(n - 1).scale(-a)]));
        let pq = q_ladder_numeric(&sys, &field, n, &zs)?;
        num.add(n, pair_gap(&pc, &pq, &zs)?);
        low.add(n, q_lowering_residual(&sys, &pq, q, &zs)?);
        if n >= 2 {
            rai_c.add(n, q_raising_residual(&sys, lad.as_ref(), q, n, &zs)?);
            rai_q.add(n, q_raising_residual(&sys, &quad, q, n, &zs)?);
        }
    }
    push_worst(cx, "D_q phi_n = A_n phi_{n-1}, coefficientwise", &coef, tol::Q_LOWERING_COEFF);
    push_worst(cx, "integral A_n, B_n vs closed form", &num, tol::Q_LADDER_MATCH);
    push_worst(cx, "q-lowering, integral form", &low, tol::LOWERING);
    push_worst(cx, "q-raising, closed form", &rai_c, tol::RAISING);
    push_worst(cx, "q-raising, integral form", &rai_q, tol::RAISING);
    Ok(())
}

fn q_functional_eq(cx: &mut Ctx<'_>) -> Result<()> {
    need_n(cx, 2)?;
    let q = rs_q(cx)?;
    let field = RsField { q };
    let sys = rs_system(q, cx.n() + 1)?;
    let lad = closed_q_ladder(cx.w())?;
    let quad = QQuadLadder::new(&sys, &field)?;
    let zs = default_samples();
    let (mut fe_c, mut fe_q, mut df_c, mut df_q) =
        (Worst::default(), Worst::default(), Worst::default(), Worst::default());
    for n in 2..=cx.n() {
        fe_c.add(n, q_functional_equation_residual(&sys, lad.as_ref(), &field, n, &zs)?);
        fe_q.add(n, q_functional_equation_residual(&sys, &quad, &field, n, &zs)?);
        df_c.add(n, q_fe_diff_residual(&sys, lad.as_ref(), q, n, &zs)?);
        df_q.add(n, q_fe_diff_residual(&sys, &quad, q, n, &zs)?);
    }
    push_worst(cx, "q functional equation, closed-form ladder", &fe_c, tol::FUNCTIONAL_EQ);
    push_worst(cx, "q functional equation, integral ladder", &fe_q, tol::FUNCTIONAL_EQ);
    push_worst(cx, "difference form, closed-form ladder", &df_c, tol::FUNCTIONAL_EQ);
    push_worst(cx, "difference form, integral ladder", &df_q, tol::FUNCTIONAL_EQ);
    cx.note("the j = 0 summand uses the seed A_0/kappa_{-1} = -z M_1(z)");
    Ok(())
}

fn dpii(cx: &mut Ctx<'_>) -> Result<()> {
    need_n(cx, 2)?;
    let t = mb_t(cx)?;
    let n = cx.n();
    let (_, tseq) = mb_system_toeplitz(t, n)?;
    let dseq = mb_dpii(t, n)?;
    cx.check("Toeplitz r_n satisfy the recurrence", mb_dpii_residual(&tseq), tol::DPII);
    cx.check("forward recurrence satisfies the recurrence", mb_dpii_residual(&dseq), tol::DPII);
    let gap = (1..=n).map(|k| (tseq.r[k] - dseq.r[k]).abs()).fold(0.0, f64::max);
    cx.check("forward recurrence vs Toeplitz route", gap, tol::DPII);
    let (r1, r2, _, _) = mb_first_members(t)?;
    cx.check(
        "r_1 = -I_1/I_0 and r_2 from Bessel functions",
        (tseq.r[1] - r1).abs().max((tseq.r[2] - r2).abs()),
        tol::DPII,
    );
    let seed = crate::families::ReflectionSequence { r: tseq.r[..2].to_vec(), ..tseq.clone() };
    if let Ok(plain) = mb_dpii_extend_f64(&seed, n) {
        let loss = (1..=n).map(|k| (plain.r[k] - tseq.r[k]).abs()).fold(0.0, f64::max);
        cx.note(format!("forward recurrence in plain binary64 deviates by {loss:.2e}"));
    }
    Ok(())
}

fn rn_ode(cx: &mut Ctx<'_>) -> Result<()> {
    need_n(cx, 2)?;
    let t = mb_t(cx)?;
    let n = cx.n();
    let (sys, seq) = mb_system_toeplitz(t, n + 1)?;
    let sub = mb_coefficient_odes(&seq, &sys, t)?;
    for c in sub.checks {
        cx.rep.push(c);
    }
    const H: f64 = 1e-4;
    cx.rep.params.insert("rk4_step".into(), H);
    let (mut rr, mut kk) = (Worst::default(), Worst::default());
    for k in 1..=n {
        let s = mb_rn_ode_integrate(k, t, H)?;
        rr.add(k, (s.r - seq.r[k]).abs() / seq.r[k].abs());
        kk.add(k, (s.kappa2_quad - sys.kappa(k).powi(2)).abs() / sys.kappa(k).powi(2));
    }
    push_worst(cx, "RK4 r_n(t) vs Toeplitz, relative", &rr, tol::DYNAMICS);
    push_worst(cx, "kappa_n^2 from the t-integral, relative", &kk, tol::DYNAMICS);
    Ok(())
}

fn zeros_stationarity(cx: &mut Ctx<'_>) -> Result<()> {
    need_n(cx, 1)?;
    let w = cx.w().clone();
    let sys = system(cx, cx.n() + 1)?;
    let field = Field::for_weight(&w).ok();
    let lad = closed_ladder(&w, &sys).ok();
    let (mut res, mut rec, mut modulus) = (Worst::default(), Worst::default(), Worst::default());
    let (mut grad, mut two, mut fam, mut at_zeros, mut qconst, mut tratio) = (
        Worst::default(),
        Worst::default(),
        Worst::default(),
        Worst::default(),
        Worst::default(),
        Worst::default(),
    );
    let mut inside = true;
    let mut origin = Vec::new();
    let generic = circle_samples(8, 0.6, 0.2);
    for n in 1..=cx.n() {
        let f = sys.phi(n);
        let rs = roots(f)?;
        res.add(n, rs.max_residual());
        rec.add(n, rs.reconstruct(f.leading()).rel_diff(f));
        modulus.add(n, rs.max_modulus());
        inside &= assert_in_disk(&rs);
        let (Some(field), Some(lad)) = (field.as_ref(), lad.as_ref()) else { continue };
        if rs.roots.iter().any(|z| z.norm() == 0.0) {
            origin.push(n);
            continue;
        }
        let zs = &rs.roots;
        let s = stationarity_residual(zs, field, lad.as_ref(), n)?;
        grad.add(n, s.gradient);
        two.add(n, s.two_body);
        let p = |z: C64| -> Vec<C64> {
            match (lad.ab(n, z), lad.dab(n, z)) {
                (Ok((a, _)), Ok((da, _))) => vec![-(n as f64 - 1.0) / z, -field.vprime(z), -da / a],
                _ => vec![C64::new(f64::NAN, 0.0)],
            }
        };
        at_zeros.add(n, ode_at_zeros_residual(f, zs, p));
        match w {
            WeightSpec::CircularJacobi { a } => {
                fam.add(n, cj_stationarity_residual(a, zs)?);
                qconst.add(n, spread(&cj_q_values(a, f, &generic)));
                let shifted: Vec<C64> = zs.iter().map(|z| z * 0.9 + C64::new(0.01, 0.02)).collect();
                let r0 = t_function(zs, field, lad.as_ref(), n)?.div(cj_t_function(a, zs)?);
                let r1 = t_function(&shifted, field, lad.as_ref(), n)?.div(cj_t_function(a, &shifted)?);
                tratio.add(n, r0.rel_diff(r1));
            }
            WeightSpec::Szego { a, b } => {
                fam.add(n, sz_stationarity_residual(a, b, zs)?);
                let qs = q_from_p(f, &generic, |z| sz_ode_pq(a, b, n, z).0);
                let expect: Vec<C64> = generic.iter().map(|&z| sz_ode_pq(a, b, n, z).1).collect();
                qconst.add(n, max_gap(&qs, &expect));
            }
            _ => {}
        }
    }
    push_worst(cx, "root backward residual", &res, tol::ROOT_RESIDUAL);
    push_worst(cx, "roots reconstruct phi_n", &rec, tol::RECONSTRUCTION);
    push_worst(cx, "max |z_j|", &modulus, 1.0 - DISK_MARGIN);
    cx.flag("all zeros inside |z| < 1 - 1e-10", inside);
    push_worst(cx, "stationarity of T at the zeros", &grad, tol::STATIONARITY);
    push_worst(cx, "pair sum equals f''/f'", &two, tol::TWO_BODY);
    push_worst(cx, "f'' + P f' = 0 at the zeros", &at_zeros, tol::STATIONARITY);
    push_worst(cx, "family stationarity system", &fam, tol::STATIONARITY);
    push_worst(cx, "Q recovered from f, f', f''", &qconst, tol::CONSTANT_Q);
    push_worst(cx, "T over the circular-Jacobi display is configuration independent", &tratio, tol::T_RATIO);
    if field.is_none() || lad.is_none() {
        cx.note(format!("no classical ladder for '{}': containment only", w.name()));
    }
    if !origin.is_empty() {
        cx.note(format!("stationarity skipped for n = {origin:?}: zero at the origin"));
    }
    Ok(())
}

fn delta_suite(cx: &mut Ctx<'_>) -> Result<()> {
    need_n(cx, 1)?;
    let sys = system(cx, cx.n())?;
    let (mut agree, mut fam) = (Worst::default(), Worst::default());
    for n in 1..=cx.n() {
        let d = delta(&sys, n)?;
        agree.add(n, d.agreement());
        let closed = d.second.value;
        match *cx.w() {
            WeightSpec::CircularJacobi { a } => fam.add(n, cj_delta(a, n).rel_diff(closed)),
            WeightSpec::Szego { a, b } => fam.add(n, sz_delta(a, b, n).rel_diff(closed)),
            _ => {}
        }
    }
    push_worst(cx, "prod phi_{n-1}(z_{j,n}) vs closed form", &agree, tol::DELTA);
    push_worst(cx, "family formula vs closed form", &fam, tol::FAMILY_DELTA);
    Ok(())
}

fn gen_disc(cx: &mut Ctx<'_>) -> Result<()> {
    need_n(cx, 1)?;
    let w = cx.w().clone();
    let sys = reference_system(&w, cx.n() + 1)?;
    let op = match w {
        WeightSpec::RogersSzego { q } => DiscOperator::QDifference(QReal::new(q)?),
        _ => DiscOperator::Derivative,
    };
    let (mut g, mut rs, mut res, mut syl) = (Worst::default(), Worst::default(), Worst::default(), Worst::default());
    for n in 1..=cx.n() {
        let d = generalized_discriminant(&sys, n, op)?;
        g.add(n, d.agreement());
        if let DiscOperator::QDifference(q) = op {
            rs.add(n, d.first.value.rel_diff(rs_disc(q, n)));
        }
        if n >= 2 {
            let c = discriminant(sys.phi(n))?;
            res.add(n, c.agreement());
            if n <= 6 {
                syl.add(n, disc_sylvester(sys.phi(n))?.value.rel_diff(c.first.value));
            }
        }
    }
    let t = match op {
        DiscOperator::Derivative => "d/dz",
        DiscOperator::QDifference(_) => "D_q",
    };
    push_worst(cx, &format!("D(phi_n, {t}) by roots vs through A_n"), &g, tol::GEN_DISC);
    push_worst(cx, "D(phi_n, D_q) vs Rogers–Szegő closed form", &rs, tol::GEN_DISC);
    push_worst(cx, "discriminant: root product vs resultant", &res, tol::RESULTANT);
    push_worst(cx, "discriminant: root product vs Sylvester determinant", &syl, tol::RESULTANT);
    Ok(())
}

fn random_poly(rng: &mut ChaCha8Rng, deg: usize) -> ComplexPoly {
    ComplexPoly::new(
        (0..=deg)
            .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect(),
    )
}

fn q_disc(cx: &mut Ctx<'_>) -> Result<()> {
    need_n(cx, 2)?;
    let q = rs_q(cx)?;
    let sys = rs_system(q, cx.n())?;
    let (mut d1, mut d2, mut forms, mut gh) =
        (Worst::default(), Worst::default(), Worst::default(), Worst::default());
    for n in 2..=cx.n() {
        let p = q_discriminant(sys.phi(n), q)?;
        d1.add(n, p.first.value.rel_diff(rs_disc(q, n)));
        forms.add(n, p.agreement());
        let h = rs_h(q, n);
        let ph = q_discriminant(&h, q)?;
        d2.add(n, ph.first.value.rel_diff(rs_disc2(q, n)));
        forms.add(n, ph.agreement());
        gh.add(n, generalized_discriminant_brute(&h, DiscOperator::QDifference(q))?.value.rel_diff(rs_disc2(q, n)));
    }
    push_worst(cx, "q-discriminant of phi_n vs closed form", &d1, tol::Q_DISC);
    push_worst(cx, "q-discriminant of H_n vs closed form", &d2, tol::Q_DISC);
    push_worst(cx, "D(H_n, D_q) by roots vs closed form", &gh, tol::Q_DISC);
    push_worst(cx, "the two product forms agree", &forms, tol::Q_DISC_FORMS);
    let mut rng = cx.rng();
    let quad = random_poly(&mut rng, 2);
    let near_one = QReal::new(1.0 - 1e-10)?;
    let classical = discriminant(&quad)?.first.value;
    cx.check(
        "random quadratic: q-discriminant at q = 1 - 1e-10 vs classical",
        q_discriminant(&quad, near_one)?.first.value.rel_diff(classical),
        tol::Q_DISC,
    );
    let (a, b, c) = (quad.coeff(2), quad.coeff(1), quad.coeff(0));
    let formula = q.q * b * b - (1.0 + q.q).powi(2) * a * c;
    let direct = q_discriminant(&quad, q)?.first.value;
    cx.check(
        "random quadratic: q B^2 - (1+q)^2 A C",
        direct.rel_diff(crate::logval::LogValue::from_complex(formula)),
        tol::Q_DISC_FORMS,
    );
    Ok(())
}

fn q_disc_limit(cx: &mut Ctx<'_>) -> Result<()> {
    need_n(cx, 2)?;
    let grid = [0.9, 0.99, 0.999];
    let sub = rs_disc_q_limit(cx.n(), &grid)?;
    for c in sub.checks {
        cx.rep.push(c);
    }
    for s in sub.notes {
        cx.note(s);
    }
    Ok(())
}

fn adjoint(cx: &mut Ctx<'_>) -> Result<()> {
    need_n(cx, 1)?;
    let mut rng = cx.rng();
    let polys: Vec<(ComplexPoly, ComplexPoly)> = (0..4)
        .map(|_| {
            let (df, dg) = (rng.gen_range(0..=8), rng.gen_range(0..=8));
            (random_poly(&mut rng, df), random_poly(&mut rng, dg))
        })
        .collect();
    let w = cx.w().clone();
    let mut worst = Worst::default();
    let name;
    if let WeightSpec::RogersSzego { .. } = w {
        let q = rs_q(cx)?;
        let sys = rs_system(q, cx.n() + 1)?;
        let lad = closed_q_ladder(&w)?;
        let field = RsField { q };
        for n in 1..=cx.n() {
            for (f, g) in &polys {
                worst.add(n, q_adjoint_residual(&sys, lad.as_ref(), &field, n, f, g)?);
            }
        }
        name = "(L f, g) = (f, L* g) for L = D_q + B_n";
    } else {
        let field = classical(cx)?;
        let sys = reference_system(&w, cx.n() + 1)?;
        let lad = closed_ladder(&w, &sys)?;
        for n in 1..=cx.n() {
            for (f, g) in &polys {
                worst.add(n, adjoint_residual(&sys, lad.as_ref(), &field, n, f, g)?);
            }
        }
        name = "(L f, g) = (f, L* g) for L = d/dz + B_n";
    }
    push_worst(cx, name, &worst, tol::ADJOINT);
    cx.note("inner product int f conj(g) w dtheta with int w dtheta = 1");
    Ok(())
}

// ------------------------------------------------------------------ config

/// A suite over a list of weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSpec {
    pub suite: Suite,
    pub weights: Vec<WeightSpec>,
    pub n: usize,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RunConfig {
    #[serde(default)]
    pub runs: Vec<RunSpec>,
}

impl RunConfig {
    pub fn inputs(&self) -> Vec<(Suite, SuiteInput)> {
        self.runs
            .iter()
            .flat_map(|r| {
                r.weights.iter().map(move |w| {
                    (r.suite, SuiteInput { weight: w.clone(), n: r.n, seed: r.seed })
                })
            })
            .collect()
    }
}

/// Outcome of one suite invocation inside a batch.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteRun {
    pub report: VerificationReport,
    pub error: Option<OpucError>,
}

/// Run every entry of `cfg`. Failures become failing reports carrying the
/// error text, so the batch always completes.
pub fn run_config(cfg: &RunConfig, opts: &SuiteOptions) -> Vec<SuiteRun> {
    let inputs = cfg.inputs();
    opts.exec.map(&inputs, |(suite, input)| match run_suite(*suite, input, opts) {
        Ok(report) => SuiteRun { report, error: None },
        Err(e) => {
            let mut report = VerificationReport::new(suite.name(), suite.anchor(), input.weight.name());
            report.params = input.weight.params();
            report.params.insert("n".into(), input.n as f64);
            report.push(Check::flag("suite completed", false));
            report.note(e.to_string());
            SuiteRun { report, error: Some(e) }
        }
    })
}

fn cj(a: f64) -> WeightSpec {
    WeightSpec::CircularJacobi { a }
}
fn sz(a: f64, b: f64) -> WeightSpec {
    WeightSpec::Szego { a, b }
}
fn mb(t: f64) -> WeightSpec {
    WeightSpec::ModifiedBessel { t }
}
fn rs(q: f64) -> WeightSpec {
    WeightSpec::RogersSzego { q }
}

/// Configuration covering every suite on the standard parameter grids.
pub fn default_config() -> RunConfig {
    let cjs = [cj(0.5), cj(1.0), cj(2.5)];
    let szs = vec![sz(1.0, 0.5), sz(1.3, 0.2)];
    let mbs = vec![mb(0.5), mb(1.0), mb(2.0)];
    let rss = vec![rs(0.2), rs(0.5), rs(0.8)];
    let classical: Vec<WeightSpec> = cjs.iter().chain(&szs).chain(&mbs).cloned().collect();
    let all: Vec<WeightSpec> = classical.iter().chain(&rss).cloned().collect();
    let run = |suite, weights: Vec<WeightSpec>, n, seed| RunSpec { suite, weights, n, seed };
    let mut runs = vec![];
    for seed in 1..=3 {
        runs.push(run(Suite::Recurrences, vec![WeightSpec::Unspecified], 30, seed));
    }
    runs.push(run(Suite::Recurrences, all.clone(), 12, 0));
    let route_ws: Vec<WeightSpec> = cjs.iter().chain(&[sz(1.0, 0.5), sz(0.5, 0.5)]).chain(&mbs).chain(&rss).cloned().collect();
    runs.push(run(Suite::Routes, route_ws, 12, 0));
    runs.push(run(Suite::Cd, vec![WeightSpec::Unspecified], 12, 7));
    runs.push(run(Suite::Cd, all.clone(), 12, 7));
    runs.push(run(Suite::Ladder, cjs.iter().chain(&szs).cloned().collect(), 8, 0));
    runs.push(run(Suite::Ladder, vec![mb(1.0), mb(2.0)], 6, 0));
    runs.push(run(Suite::Ode, classical.clone(), 8, 0));
    runs.push(run(Suite::FunctionalEq, classical.clone(), 8, 0));
    runs.push(run(Suite::QLadder, rss.clone(), 10, 0));
    runs.push(run(Suite::QFunctionalEq, rss.clone(), 6, 0));
    runs.push(run(Suite::Dpii, mbs.clone(), 10, 0));
    runs.push(run(Suite::RnOde, vec![mb(1.0)], 5, 0));
    runs.push(run(Suite::ZerosStationarity, all.clone(), 15, 0));
    runs.push(run(Suite::Delta, all.clone(), 10, 0));
    runs.push(run(Suite::GenDisc, vec![cj(1.0), cj(2.5), sz(1.0, 0.5), mb(1.0)], 8, 0));
    runs.push(run(Suite::GenDisc, rss.clone(), 8, 0));
    runs.push(run(Suite::QDisc, rss.clone(), 8, 11));
    runs.push(run(Suite::QDiscLimit, vec![rs(0.5)], 4, 0));
    runs.push(run(Suite::Adjoint, classical, 8, 5));
    runs.push(run(Suite::Adjoint, rss, 8, 5));
    RunConfig { runs }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
            assert!(!s.anchor().is_empty() && !s.explain().is_empty());
        }
        assert!("nope".parse::<Suite>().is_err());
    }

    #[test]
    fn default_config_covers_every_suite() {
        let cfg = default_config();
        for s in Suite::ALL {
            assert!(cfg.runs.iter().any(|r| r.suite == s), "{s}");
        }
    }

    #[test]
    fn lebesgue_delta_is_degenerate() {
        let input = SuiteInput { weight: WeightSpec::Lebesgue, n: 4, seed: 0 };
        let e = run_suite(Suite::Delta, &input, &SuiteOptions::default()).unwrap_err();
        assert!(matches!(e, OpucError::DegenerateReflection { .. }));
    }
}
