//! Integrator and period-map properties checked against independent oracles.

use std::f64::consts::TAU;

use approx::assert_abs_diff_eq;
use proptest::prelude::*;
use tongues_core::ode::integrate;
use tongues_core::torus::period_map_from;
use tongues_core::{is_identity_map, period_map, IntegratorConfig, LiftMap, Params};

/// Classical RK4 with a fixed step; slow but independent of the adaptive code.
fn rk4_period_map(p: &Params, x0: f64, steps: usize) -> f64 {
    let h = TAU / steps as f64;
    let f = |t: f64, x: f64| p.velocity(t, x);
    let mut x = x0;
    for k in 0..steps {
        let t = k as f64 * h;
        let k1 = f(t, x);
        let k2 = f(t + 0.5 * h, x + 0.5 * h * k1);
        let k3 = f(t + 0.5 * h, x + 0.5 * h * k2);
        let k4 = f(t + h, x + h * k3);
        x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    x
}

#[test]
fn period_map_matches_fixed_step_rk4() {
    let cfg = IntegratorConfig::with_tolerance(1e-12);
    for (a, s, x) in [(5.0, 1.0, 0.3), (0.0, 2.5, 1.0), (-1.3, 7.0, -2.0)] {
        let p = Params::new(1.0, a, s).unwrap();
        let adaptive = period_map(&p, x, &cfg).unwrap();
        let brute = rk4_period_map(&p, x, 1_000_000);
        assert_abs_diff_eq!(adaptive, brute, epsilon = 1e-9);
    }
}

#[test]
fn exponential_growth_is_exact() {
    let cfg = IntegratorConfig::with_tolerance(1e-12);
    let f = |_t: f64, y: &[f64], dy: &mut [f64]| {
        dy[0] = 0.7 * y[0];
        dy[1] = -1.3 * y[1];
    };
    let sol = integrate(&f, 0.0, 3.0, &[1.0, 2.0], &cfg).unwrap();
    assert_abs_diff_eq!(sol.state[0], (0.7f64 * 3.0).exp(), epsilon = 1e-10);
    assert_abs_diff_eq!(sol.state[1], 2.0 * (-3.9f64).exp(), epsilon = 1e-12);
}

#[test]
fn tighter_tolerance_reduces_error() {
    let p = Params::new(1.0, 0.4, 3.0).unwrap();
    let reference = rk4_period_map(&p, 0.5, 400_000);
    let loose = period_map(&p, 0.5, &IntegratorConfig::with_tolerance(1e-6)).unwrap();
    let tight = period_map(&p, 0.5, &IntegratorConfig::with_tolerance(1e-10)).unwrap();
    assert!((tight - reference).abs() < (loose - reference).abs().max(1e-12));
    assert!((tight - reference).abs() < 1e-8);
}

#[test]
fn lift_commutes_with_translation() {
    let cfg = IntegratorConfig::default();
    let p = Params::new(1.0, 0.7, 4.0).unwrap();
    let lift = LiftMap::build(&p, 128, &cfg).unwrap();
    for x in [0.1, 1.7, 3.3, 5.9] {
        assert_abs_diff_eq!(lift.eval(x + TAU), lift.eval(x) + TAU, epsilon = 1e-12);
        assert_abs_diff_eq!(
            lift.eval(x - 2.0 * TAU),
            lift.eval(x) - 2.0 * TAU,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(lift.eval(x), lift.exact(x).unwrap(), epsilon = 1e-4);
    }
    let dense = LiftMap::build(&p, 1024, &cfg).unwrap();
    let err = |l: &LiftMap| (l.eval(1.7) - l.exact(1.7).unwrap()).abs();
    assert!(err(&dense) < err(&lift) / 8.0);
}

#[test]
fn identity_map_detected_only_when_present() {
    let cfg = IntegratorConfig::with_tolerance(1e-12);
    let p = Params::new(1.0, 0.0, 2.678_116_801_906_561_3).unwrap();
    let check = is_identity_map(&p, 1e-6, 64, &cfg).unwrap();
    assert!(check.is_identity, "{check:?}");
    assert_eq!(check.r, 0);
    let off = Params::new(1.0, 0.0, 2.0).unwrap();
    assert!(!is_identity_map(&off, 1e-6, 64, &cfg).unwrap().is_identity);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn flow_reverses(a in -3.0f64..3.0, s in 0.0f64..8.0, x in -4.0f64..4.0) {
        let cfg = IntegratorConfig::with_tolerance(1e-12);
        let p = Params::new(1.0, a, s).unwrap();
        let f = |t: f64, y: &[f64], dy: &mut [f64]| dy[0] = p.velocity(t, y[0]);
        let fwd = integrate(&f, 0.0, TAU, &[x], &cfg).unwrap();
        let back = integrate(&f, TAU, 0.0, &fwd.state, &cfg).unwrap();
        // the backward flow amplifies errors by 1/H'(x)
        let dh = (period_map(&p, x + 1e-6, &cfg).unwrap() - period_map(&p, x - 1e-6, &cfg).unwrap()) / 2e-6;
        prop_assert!((back.state[0] - x).abs() * dh.min(1.0) < 1e-10);
    }

    #[test]
    fn period_map_is_increasing(a in -3.0f64..3.0, s in 0.0f64..8.0, x in -4.0f64..4.0) {
        let cfg = IntegratorConfig::default();
        let p = Params::new(1.0, a, s).unwrap();
        let h0 = period_map(&p, x, &cfg).unwrap();
        let h1 = period_map(&p, x + 0.01, &cfg).unwrap();
        prop_assert!(h1 > h0);
        let shifted = period_map(&p, x + TAU, &cfg).unwrap();
        prop_assert!((shifted - h0 - TAU).abs() < 1e-8);
    }

    #[test]
    fn time_shift_conjugates_base_point(a in -2.0f64..2.0, s in 0.0f64..5.0, x in 0.0f64..6.0) {
        // based at t = 2π the map coincides with the one based at 0
        let cfg = IntegratorConfig::with_tolerance(1e-12);
        let p = Params::new(1.0, a, s).unwrap();
        let h0 = period_map_from(&p, 0.0, x, &cfg).unwrap();
        let h1 = period_map_from(&p, TAU, x, &cfg).unwrap();
        prop_assert!((h0 - h1).abs() < 1e-9);
    }
}
