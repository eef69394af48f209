//! Closed forms and constructions against values computed independently in
//! 50-digit arithmetic (Cholesky of the Toeplitz matrix of quadrature moments,
//! polynomial roots by a separate solver).

#![allow(clippy::excessive_precision)]

use opuc::disc::{cj_delta, delta, discriminant, q_discriminant};
use opuc::families::{build_system, mb_first_members, mb_kappa2_toeplitz, reference_system, rs_h, rs_system};
use opuc::moments::{system_from_moments, trig_moments_converged};
use opuc::zeros::roots;
use opuc::{ComplexPoly, OpucSystem, QReal, Route, WeightSpec, C64};

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn check_members(sys: &OpucSystem, expected: &[(usize, f64, f64)], tol: f64) {
    for &(n, kappa, phi0) in expected {
        assert!(rel(sys.kappa(n), kappa) < tol, "kappa_{n}: {} vs {kappa}", sys.kappa(n));
        assert!(rel(sys.phi0(n).re, phi0) < tol, "phi_{n}(0): {} vs {phi0}", sys.phi0(n));
        assert!(sys.phi0(n).im.abs() < tol);
    }
}

const CJ15: [(usize, f64, f64); 3] = [
    (1, 1.25, 0.75),
    (3, 1.467_419_610_234_236_988_3, 0.489_139_870_078_078_996_09),
    (6, 1.599_873_838_815_149_221_1, 0.319_974_767_763_029_844_21),
];

const SZ1_05: [(usize, f64, f64); 4] = [
    (1, 1.020_620_726_159_657_540_9, 0.204_124_145_231_931_508_18),
    (2, 1.129_620_142_643_829_924_8, 0.484_122_918_275_927_110_65),
    (5, 1.184_956_285_660_269_093_6, 0.091_150_483_512_328_391_817),
    (7, 1.211_488_762_350_648_184_6, 0.071_264_044_844_155_775_562),
];

const MB1: [(usize, f64, f64); 4] = [
    (1, 1.117_520_048_860_767_295_2, -0.498_849_736_499_651_488_92),
    (2, 1.124_977_099_582_202_866_3, 0.129_315_176_907_483_915_96),
    (5, 1.125_195_928_358_291_993_3, -0.000_281_026_381_234_280_237_46),
    (8, 1.125_195_928_606_217_585, 1.060_198_330_094_110_419_1e-7),
];

#[test]
fn circular_jacobi_members() {
    let w = WeightSpec::CircularJacobi { a: 1.5 };
    for route in [Route::ClosedForm, Route::SzegoRecurrence, Route::Moments] {
        check_members(&build_system(&w, 6, route).unwrap(), &CJ15, 1e-10);
    }
    let phi6 = [
        0.319_974_767_763_029_844_21,
        0.738_403_310_222_376_563_56,
        1.174_732_538_990_144_532_9,
        1.566_310_051_986_859_377_3,
        1.846_008_275_555_941_408_9,
        1.919_848_606_578_179_065_3,
        1.599_873_838_815_149_221_1,
    ];
    let sys = build_system(&w, 6, Route::ClosedForm).unwrap();
    for (k, &c) in phi6.iter().enumerate() {
        assert!(rel(sys.phi(6).coeff(k).re, c) < 1e-12, "coefficient {k}");
    }
}

#[test]
fn circular_jacobi_first_member_and_reflections() {
    let sys = build_system(&WeightSpec::CircularJacobi { a: 1.0 }, 8, Route::ClosedForm).unwrap();
    assert!(rel(sys.kappa(1), 2.0 / 3f64.sqrt()) < 1e-15);
    for n in 1..=8 {
        assert!(rel(sys.reflection(n).re, 1.0 / (n as f64 + 1.0)) < 1e-13);
    }
    let rs = roots(sys.phi(1)).unwrap();
    assert!((rs.roots[0] + 0.5).norm() < 1e-15);
}

#[test]
fn szego_members() {
    let w = WeightSpec::Szego { a: 1.0, b: 0.5 };
    for route in [Route::ClosedForm, Route::SzegoRecurrence, Route::Moments] {
        check_members(&build_system(&w, 7, route).unwrap(), &SZ1_05, 1e-10);
    }
}

#[test]
fn modified_bessel_members() {
    let w = WeightSpec::ModifiedBessel { t: 1.0 };
    check_members(&reference_system(&w, 8).unwrap(), &MB1, 1e-9);
    let from_moments = system_from_moments(&trig_moments_converged(&w, 8).unwrap(), 8, w.clone()).unwrap();
    check_members(&from_moments, &MB1, 1e-9);
    let (r1, _, _, _) = mb_first_members(1.0).unwrap();
    assert!(rel(r1, -0.446_389_965_896_534_507_05) < 1e-14);
    for &(n, kappa, _) in &MB1 {
        assert!(rel(mb_kappa2_toeplitz(1.0, n).unwrap(), kappa * kappa) < 1e-10);
    }
}

#[test]
fn rogers_szego_members() {
    let q = QReal::new(0.25).unwrap();
    let sys = rs_system(q, 4).unwrap();
    assert!(rel(sys.phi0(1).re, 1.0 / 3f64.sqrt()) < 1e-14);
    // H_n(z|q) -> (1+z)^n
    let h = rs_h(QReal::new(1.0 - 1e-6).unwrap(), 3);
    for (k, b) in [1.0, 3.0, 3.0, 1.0].into_iter().enumerate() {
        assert!(rel(h.coeff(k).re, b) < 1e-4);
    }
}

#[test]
fn circular_jacobi_zeros_and_discriminants() {
    let sys = build_system(&WeightSpec::CircularJacobi { a: 1.0 }, 5, Route::ClosedForm).unwrap();
    let rs = roots(sys.phi(5)).unwrap();
    assert!(rel(rs.max_modulus(), 0.730_249_966_748_868_585_92) < 1e-12);
    let d = delta(&sys, 5).unwrap();
    for v in [d.first.value, d.second.value, cj_delta(1.0, 5)] {
        let z = v.to_complex().unwrap();
        assert!(rel(z.re, 0.001_147_550_621_098_493_891_9) < 1e-11, "{z}");
        assert!(z.im.abs() < 1e-15);
    }
    let c = discriminant(sys.phi(5)).unwrap();
    assert!(rel(c.first.to_complex().unwrap().re, 16.0 / 3.0) < 1e-11);
}

#[test]
fn quadratic_q_discriminant() {
    let p = ComplexPoly::new(vec![C64::new(1.0, 0.0); 3]);
    for q in [0.2, 0.5, 0.9] {
        let d = q_discriminant(&p, QReal::new(q).unwrap()).unwrap();
        let expect = q - (1.0 + q) * (1.0 + q);
        assert!(rel(d.first.to_complex().unwrap().re, expect) < 1e-14);
        assert!(d.agreement() < 1e-14);
    }
}

#[test]
fn lebesgue_is_degenerate_for_the_schur_product() {
    let sys = reference_system(&WeightSpec::Lebesgue, 5).unwrap();
    for n in 1..=5 {
        assert_eq!(sys.phi(n).coeff(n), C64::new(1.0, 0.0));
    }
    assert!(matches!(delta(&sys, 3), Err(opuc::OpucError::DegenerateReflection { .. })));
}
