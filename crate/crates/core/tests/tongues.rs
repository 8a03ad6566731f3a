use std::f64::consts::TAU;

use approx::assert_abs_diff_eq;
use num_complex::Complex64;
use proptest::prelude::*;
use tongues_core::tongue::tongue_slice;
use tongues_core::{
    bessel_j, find_adjacencies, mobius_apply, monodromy, period_map, IntegratorConfig, Params,
    ProjPoint, SliceOutcome,
};

fn slice(r: i64, s: f64) -> (f64, f64) {
    match tongue_slice(r, s, 1.0, 1e-10, &IntegratorConfig::default()).unwrap() {
        SliceOutcome::Slice(t) => (t.g_minus, t.g_plus),
        SliceOutcome::Empty { .. } => panic!("empty slice r={r} s={s}"),
    }
}

#[test]
fn tips_on_the_axis() {
    for r in 0..4i64 {
        let (lo, hi) = slice(r, 0.0);
        let tip = ((r * r) as f64 + 1.0).sqrt();
        if r == 0 {
            assert_abs_diff_eq!(lo, -1.0, epsilon = 1e-8);
            assert_abs_diff_eq!(hi, 1.0, epsilon = 1e-8);
        } else {
            assert_abs_diff_eq!(lo, tip, epsilon = 1e-8);
            assert_abs_diff_eq!(hi, tip, epsilon = 1e-8);
        }
    }
}

#[test]
fn width_follows_bessel_at_large_forcing() {
    for (r, s) in [(0i64, 18.0), (1, 22.0), (2, 30.0)] {
        let (lo, hi) = slice(r, s);
        let j = bessel_j(r as i32, -s).abs();
        let bound = 1.5 / s.sqrt();
        assert!((lo - (r as f64 - j)).abs() < bound, "r={r} s={s} g-={lo}");
        assert!((hi - (r as f64 + j)).abs() < bound, "r={r} s={s} g+={hi}");
    }
}

#[test]
fn adjacencies_sit_on_integers() {
    let cfg = IntegratorConfig::with_tolerance(1e-12);
    let scan = find_adjacencies(1, 1.0, (0.5, 7.0), 1e-6, &cfg).unwrap();
    assert!(!scan.found.is_empty());
    for x in &scan.found {
        assert!(x.invariants_hold(1e-6), "{x:?}");
        let m = monodromy(&x.params(1.0), &cfg).unwrap();
        assert!(m.distance_to_identity() < 1e-5, "{x:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn zero_tongue_is_symmetric(s in 0.0f64..6.0) {
        let (lo, hi) = slice(0, s);
        prop_assert!((lo + hi).abs() < 1e-8);
    }

    #[test]
    fn opposite_tongues_mirror(r in 1i64..3, s in 0.0f64..6.0) {
        let (lo, hi) = slice(r, s);
        let (mlo, mhi) = slice(-r, s);
        prop_assert!((lo + mhi).abs() < 1e-8 && (hi + mlo).abs() < 1e-8);
    }

    #[test]
    fn rotation_is_plateau_inside(r in -2i64..3, s in 0.5f64..6.0, u in 0.05f64..0.95) {
        let (lo, hi) = slice(r, s);
        prop_assume!(hi - lo > 1e-3);
        let a = lo + u * (hi - lo);
        let res = tongues_core::rotation_number(
            &Params::new(1.0, a, s).unwrap(),
            &IntegratorConfig::default(),
            1 << 12,
        )
        .unwrap();
        prop_assert_eq!(res.locked_at, Some(r));
    }

    #[test]
    fn mobius_action_matches_period_map(a in -3.0f64..3.0, s in 0.0f64..6.0, x in 0.0f64..TAU) {
        let cfg = IntegratorConfig::with_tolerance(1e-12);
        let p = Params::new(1.0, a, s).unwrap();
        let m = monodromy(&p, &cfg).unwrap();
        let image = mobius_apply(&m.matrix, ProjPoint::Finite(Complex64::from_polar(1.0, x)));
        let w = image.finite().unwrap();
        prop_assert!((w.norm() - 1.0).abs() < 1e-7);
        let h = period_map(&p, x, &cfg).unwrap();
        let d = (w.arg() - h).rem_euclid(TAU);
        prop_assert!(d.min(TAU - d) < 1e-7);
    }

    #[test]
    fn bessel_bounded(n in -6i32..7, x in -40.0f64..40.0) {
        prop_assert!(bessel_j(n, x).abs() <= 1.0 + 1e-12);
        let parity = if n % 2 == 0 { 1.0 } else { -1.0 };
        prop_assert!((bessel_j(-n, x) - parity * bessel_j(n, x)).abs() < 1e-10);
    }
}
