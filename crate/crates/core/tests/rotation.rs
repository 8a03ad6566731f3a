use std::f64::consts::TAU;

use approx::assert_abs_diff_eq;
use proptest::prelude::*;
use tongues_core::torus::{autonomous_rotation_number, rotation_number_from};
use tongues_core::{rotation_number, IntegratorConfig, Params};

const PERIODS: usize = 1 << 16;

fn rho(nu: f64, a: f64, s: f64) -> f64 {
    rotation_number(
        &Params::new(nu, a, s).unwrap(),
        &IntegratorConfig::default(),
        PERIODS,
    )
    .unwrap()
    .rho
}

#[test]
fn autonomous_closed_form() {
    for (nu, a) in [
        (1.0, 0.5),
        (1.0, 1.5),
        (1.0, -2.25),
        (-1.0, 3.0),
        (2.0, 2.5),
    ] {
        assert_abs_diff_eq!(
            rho(nu, a, 0.0),
            autonomous_rotation_number(nu, a),
            epsilon = 1e-8
        );
    }
}

#[test]
fn locked_values_are_exact_integers() {
    let cfg = IntegratorConfig::default();
    for (a, s, r) in [(0.0, 1.0, 0), (1.0, 1.0, 1), (-1.0, 2.0, -1), (2.0, 3.0, 2)] {
        let res = rotation_number(&Params::new(1.0, a, s).unwrap(), &cfg, PERIODS).unwrap();
        assert_eq!(res.locked_at, Some(r), "a={a} s={s}");
        assert_eq!(res.rho, r as f64);
    }
}

#[test]
fn sign_of_coupling_does_not_matter() {
    // x -> x + π maps the ν flow to the −ν flow
    for (a, s) in [(0.37, 1.2), (1.6, 4.0), (-2.2, 6.5)] {
        assert_abs_diff_eq!(rho(1.0, a, s), rho(-1.0, a, s), epsilon = 1e-8);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn bounded_by_coupling(a in -3.0f64..3.0, s in 0.0f64..10.0) {
        let r = rho(1.0, a, s);
        prop_assert!(r >= a - 1.0 - 1e-9 && r <= a + 1.0 + 1e-9, "rho={r}");
    }

    #[test]
    fn odd_in_a_and_even_in_s(a in -3.0f64..3.0, s in 0.0f64..10.0) {
        let r = rho(1.0, a, s);
        prop_assert!((rho(1.0, -a, s) + r).abs() < 1e-8);
        prop_assert!((rho(1.0, a, -s) - r).abs() < 1e-8);
    }

    #[test]
    fn nondecreasing_in_a(a in -3.0f64..3.0, da in 0.0f64..0.5, s in 0.0f64..10.0) {
        prop_assert!(rho(1.0, a + da, s) >= rho(1.0, a, s) - 1e-8);
    }

    #[test]
    fn independent_of_base_point(a in -3.0f64..3.0, s in 0.0f64..10.0, x0 in 0.0f64..TAU) {
        let cfg = IntegratorConfig::default();
        let p = Params::new(1.0, a, s).unwrap();
        let r0 = rotation_number_from(&p, 0.0, &cfg, PERIODS).unwrap().rho;
        let r1 = rotation_number_from(&p, x0, &cfg, PERIODS).unwrap().rho;
        prop_assert!((r0 - r1).abs() < 1e-8);
    }
}
