use std::f64::consts::PI;

use delta_nls::theory::{self, PhysParams};
use num_complex::Complex64;
use proptest::prelude::*;

mod common;
use common::{bisect, simpson};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn delta_coefficients_are_unitary(q in -50.0f64..50.0, v in 0.01f64..50.0) {
        let c = theory::delta_scattering(q, v).unwrap();
        prop_assert!((c.t.norm_sqr() + c.r.norm_sqr() - 1.0).abs() <= 1e-12);
        prop_assert!((c.t - 1.0 - c.r).norm() <= 1e-12);
        let rate = theory::quantum_transmission_rate(q, v).unwrap();
        prop_assert!((rate - c.t.norm_sqr()).abs() <= 1e-12);
    }

    #[test]
    fn amplitudes_follow_modulus_rule(q in -20.0f64..20.0, v in 0.05f64..20.0) {
        let p = theory::split_prediction(&PhysParams::new(q, v, -10.0)).unwrap();
        let c = theory::delta_scattering(q, v).unwrap();
        prop_assert_eq!(p.amplitude_t, (2.0 * c.t.norm() - 1.0).max(0.0));
        prop_assert_eq!(p.amplitude_r, (2.0 * c.r.norm() - 1.0).max(0.0));
        prop_assert!(p.amplitude_t + p.amplitude_r <= 2.0);
        prop_assert_eq!(p.phase_t.is_some(), p.amplitude_t > 0.0);
        prop_assert_eq!(p.phase_r.is_some(), p.amplitude_r > 0.0);
    }

    #[test]
    fn zero_amplitudes_match_thresholds(q in 0.1f64..20.0, s in -1.0f64..1.0, v in 0.05f64..40.0) {
        let q = q * s.signum();
        let p = theory::split_prediction(&PhysParams::new(q, v, -10.0)).unwrap();
        let vt = theory::transmitted_threshold(q);
        let vr = theory::reflected_threshold(q);
        if (v - vt).abs() > 1e-9 * vt {
            prop_assert_eq!(p.amplitude_t == 0.0, v <= vt);
        }
        if (v - vr).abs() > 1e-9 * vr {
            prop_assert_eq!(p.amplitude_r == 0.0, v >= vr);
        }
    }

    #[test]
    fn zs_reflection_is_product(alpha in 0.05f64..1.0, lambda in -5.0f64..5.0) {
        let z = theory::zs_coefficients(alpha, Complex64::new(lambda, 0.0)).unwrap();
        prop_assert!((z.r - z.b * z.t).norm() <= 1e-12 * z.r.norm().max(1.0));
        prop_assert!(z.b.re.abs() <= 1e-15);
        prop_assert!(z.t.norm().is_finite());
    }

    #[test]
    fn bound_mass_matches_quadrature(q in -3.0f64..-0.2, ratio in 1.05f64..4.0) {
        let lambda = ratio * q.abs();
        let density = |x: f64| theory::nonlinear_bound_state(q, lambda, x, 0.0).unwrap().norm_sqr();
        let tail = 40.0 / lambda;
        let mass = 2.0 * simpson(density, 0.0, tail, 1e-12);
        prop_assert!((mass - theory::nonlinear_bound_mass(q, lambda).unwrap()).abs() <= 1e-6);
    }
}

#[test]
fn thresholds_located_by_bisection() {
    for q in [0.3, 1.0, 2.5, -1.7, 7.0] {
        let at = |v: f64| 2.0 * theory::delta_scattering(q, v).unwrap().t.norm() - 1.0;
        let ar = |v: f64| 2.0 * theory::delta_scattering(q, v).unwrap().r.norm() - 1.0;
        let qa = f64::abs(q);
        let vt = bisect(at, 1e-3 * qa, 10.0 * qa);
        let vr = bisect(ar, 1e-3 * qa, 10.0 * qa);
        assert!((vt - qa / 3f64.sqrt()).abs() <= 1e-10, "q = {q}: {vt}");
        assert!((vr - 3f64.sqrt() * qa).abs() <= 1e-10, "q = {q}: {vr}");
        assert!((vt - theory::transmitted_threshold(q)).abs() <= 1e-10);
        assert!((vr - theory::reflected_threshold(q)).abs() <= 1e-10);
    }
}

#[test]
fn amplitude_sum_tends_to_one_at_extremes() {
    for alpha in [1e-4, 1e4] {
        let p = theory::split_prediction(&PhysParams::new(alpha, 1.0, -10.0)).unwrap();
        assert!((p.amplitude_t + p.amplitude_r - 1.0).abs() <= 1e-3, "{alpha}: {p:?}");
    }
}

#[test]
fn phase_integral_values() {
    assert_eq!(theory::phi0(1.0).unwrap(), 0.0);
    let p8 = theory::phi0(0.8).unwrap();
    assert!((p8 - 0.045).abs() <= 0.002, "{p8}");

    let omega = 0.9f64;
    let s2 = (PI * omega).sin().powi(2);
    let c2 = (2.0 * omega - 1.0).powi(2);
    let oracle = simpson(
        |z| (1.0 + s2 / (PI * z).cosh().powi(2)).ln() * z / (z * z + c2),
        0.0,
        12.0,
        1e-12,
    );
    let p9 = theory::phi0(omega).unwrap();
    assert!((p9 - oracle).abs() <= 1e-10, "{p9} vs {oracle}");

    assert!(theory::phi0(0.5).is_err());
    assert!(theory::phi0(1.01).is_err());
}

#[test]
fn phase_integral_decreases() {
    let grid: Vec<f64> = (0..50).map(|k| 0.51 + 0.49 * k as f64 / 49.0).collect();
    let values: Vec<f64> = grid.iter().map(|&w| theory::phi0(w).unwrap()).collect();
    for (w, pair) in grid.windows(2).zip(values.windows(2)) {
        assert!(pair[1] < pair[0], "not decreasing at {:?}: {:?}", w, pair);
    }
}

#[test]
fn zs_pole_for_point_eight() {
    let alpha = 0.8;
    let pole = theory::zs_soliton_pole(alpha).unwrap();
    assert!((pole - Complex64::new(0.0, 0.3)).norm() < 1e-15);
    assert!((2.0 * pole.im - (2.0 * alpha - 1.0)).abs() < 1e-15);
    // |t| ε tends to the residue modulus as λ approaches the pole.
    let scaled: Vec<f64> = [1e-3, 1e-5, 1e-7]
        .iter()
        .map(|&eps| {
            let t = theory::zs_coefficients(alpha, pole + Complex64::new(0.0, eps)).unwrap().t;
            t.norm() * eps
        })
        .collect();
    assert!(scaled[2] > 1e-3, "{scaled:?}");
    assert!((scaled[1] - scaled[2]).abs() <= 1e-3 * scaled[2], "{scaled:?}");
    assert!((scaled[0] - scaled[2]).abs() <= 1e-1 * scaled[2], "{scaled:?}");

    let b0 = theory::zs_coefficients(alpha, Complex64::new(0.0, 0.0)).unwrap().b;
    assert!((b0 - Complex64::new(0.0, (0.8 * PI).sin())).norm() < 1e-14);
    let far = theory::zs_coefficients(alpha, Complex64::new(20.0, 0.0)).unwrap().b;
    assert!(far.norm() < 1e-25);
    let near_one = theory::zs_coefficients(1.0 - 1e-9, Complex64::new(0.7, 0.0)).unwrap().b;
    assert!(near_one.norm() < 1e-8);
}

#[test]
fn linear_eigenstate_norm_and_jump() {
    let q = -2.0;
    let phi = |x: f64| theory::linear_bound_state(q, x).unwrap().re;
    let mass = 2.0 * simpson(|x| phi(x).powi(2), 0.0, 30.0, 1e-13);
    assert!((mass - 2.0).abs() < 1e-10, "{mass}");
    let h = 1e-6;
    let jump = (phi(h) - phi(0.0)) / h - (phi(0.0) - phi(-h)) / h;
    assert!((jump - 2.0 * q * phi(0.0)).abs() < 1e-4, "{jump}");
    // -φ''/2 = -(q²/2) φ away from the origin.
    let x = 0.7;
    let d2 = (phi(x + 1e-4) - 2.0 * phi(x) + phi(x - 1e-4)) / 1e-8;
    assert!((-0.5 * d2 - theory::linear_bound_energy(q) * phi(x)).abs() < 1e-5);
}

#[test]
fn bound_state_near_threshold_resembles_eigenstate() {
    let q = -1.0;
    let lambda = 1.01;
    for x in [0.0, 0.5, 1.0, 2.0] {
        let exact = theory::nonlinear_bound_state(q, lambda, x, 0.3).unwrap();
        let approx = theory::bound_state_small_amplitude(q, lambda, x, 0.3).unwrap();
        assert!((exact.norm() - approx.norm()).abs() <= 0.1 * exact.norm(), "x = {x}");
    }
    let peak = theory::nonlinear_bound_state(q, 2.0, 0.0, 0.0).unwrap().norm();
    assert!((peak - 3f64.sqrt()).abs() < 1e-14);
}

#[test]
fn soliton_solves_free_equation_to_second_order() {
    let p = PhysParams {
        amplitude: 1.3,
        phase: 0.4,
        ..PhysParams::new(0.0, 2.0, -1.0)
    };
    let residual = |x: f64, t: f64, h: f64| {
        let u = |x, t| theory::soliton_exact(&p, x, t);
        let ut = (u(x, t + h) - u(x, t - h)) / (2.0 * h);
        let uxx = (u(x + h, t) - 2.0 * u(x, t) + u(x - h, t)) / (h * h);
        let c = u(x, t);
        (Complex64::i() * ut + 0.5 * uxx + c.norm_sqr() * c).norm()
    };
    let mut rng = 0.123f64;
    for _ in 0..20 {
        rng = (rng * 9301.0 + 0.2113).fract();
        let x = -3.0 + 6.0 * rng;
        let t = 0.5 * (1.0 - rng);
        let coarse = residual(x, t, 1e-2);
        let fine = residual(x, t, 5e-3);
        assert!(coarse < 1e-2, "{coarse}");
        assert!(fine < 0.3 * coarse, "x = {x}: {coarse} -> {fine}");
    }
    let s = 0.37;
    for x in [-2.0, 0.0, 1.5] {
        let a = theory::soliton_exact(&p, x, 0.2).norm();
        let b = theory::soliton_exact(&p, x + p.v * s, 0.2 + s).norm();
        assert!((a - b).abs() < 1e-14);
    }
}

#[test]
fn free_resolution_limits() {
    let (a, phase) = theory::free_resolution_asymptote(0.8).unwrap();
    assert!((a - 0.6).abs() < 1e-15);
    assert!((phase.unwrap() - 0.045).abs() < 0.002);
    assert_eq!(theory::free_resolution_asymptote(0.3).unwrap(), (0.0, None));
    assert!(theory::free_resolution_asymptote(0.5).is_err());
}
