//! Bessel functions of the first kind, integer order.
//!
//! The primary evaluator integrates `J_n(x) = (1/π) ∫₀^π cos(nθ − x sin θ) dθ`
//! with a composite 16-point Gauss–Legendre rule; the ascending power series
//! is kept as an independent check for moderate arguments.

use std::sync::OnceLock;

const GAUSS_POINTS: usize = 16;
const MIN_PANELS: usize = 16;
/// Largest phase change of the integrand allowed across one panel.
const MAX_PANEL_PHASE: f64 = 4.0;

fn gauss_legendre() -> &'static [(f64, f64)] {
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    RULE.get_or_init(|| legendre_rule(GAUSS_POINTS))
}

/// Nodes and weights of the `m`-point Gauss–Legendre rule on [−1, 1].
fn legendre_rule(m: usize) -> Vec<(f64, f64)> {
    let mut rule = Vec::with_capacity(m);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=m {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = m as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        rule.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    rule
}

/// `J_n(x)` for integer `n` and real `x`.
pub fn bessel_j(n: i32, x: f64) -> f64 {
    if x == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    let order = n as f64;
    let freq = order.abs() + x.abs();
    let panels = MIN_PANELS.max((freq * std::f64::consts::PI / MAX_PANEL_PHASE).ceil() as usize);
    let width = std::f64::consts::PI / panels as f64;
    let rule = gauss_legendre();
    let mut sum = 0.0;
    for p in 0..panels {
        let mid = (p as f64 + 0.5) * width;
        let mut panel = 0.0;
        for &(node, weight) in rule {
            let theta = mid + 0.5 * width * node;
            panel += weight * (order * theta - x * theta.sin()).cos();
        }
        sum += panel;
    }
    sum * 0.5 * width / std::f64::consts::PI
}

/// Ascending series `Σ (−1)^k (x/2)^{2k+n} / (k! (k+n)!)`.
///
/// Loses digits to cancellation for large `|x|`; intended for `|x| ≲ 12`.
pub fn bessel_j_series(n: i32, x: f64) -> f64 {
    let m = n.unsigned_abs() as usize;
    let sign = if n < 0 && m % 2 == 1 { -1.0 } else { 1.0 };
    let half = 0.5 * x;
    let mut term = 1.0;
    for k in 1..=m {
        term *= half / k as f64;
    }
    let mut sum = term;
    let q = half * half;
    for k in 1..400 {
        term *= -q / (k as f64 * (k + m) as f64);
        sum += term;
        if term.abs() < 1e-18 * sum.abs().max(1e-300) && k > 2 {
            break;
        }
    }
    sign * sum
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn values_at_origin() {
        assert_eq!(bessel_j(0, 0.0), 1.0);
        assert_eq!(bessel_j(1, 0.0), 0.0);
        assert_eq!(bessel_j_series(0, 0.0), 1.0);
    }

    #[test]
    fn gauss_rule_integrates_polynomials() {
        let rule = legendre_rule(16);
        let total: f64 = rule.iter().map(|(_, w)| w).sum();
        assert!((total - 2.0).abs() < 1e-14);
        let x30: f64 = rule.iter().map(|(x, w)| w * x.powi(30)).sum();
        assert!((x30 - 2.0 / 31.0).abs() < 1e-14);
    }

    #[test]
    fn first_zero_of_j0() {
        // located by sign change of the series
        let z =
            crate::roots::brent_root(|x| Ok(bessel_j_series(0, x)), 2.0, 3.0, 1e-15, 200).unwrap();
        assert!((z - 2.404825557695773).abs() < 1e-12);
        assert!(bessel_j(0, 2.404825557695773).abs() < 1e-10);
    }

    #[test]
    fn quadrature_agrees_with_series() {
        for n in 0..=10 {
            for k in 0..=48 {
                let x = -12.0 + 0.5 * k as f64;
                let q = bessel_j(n, x);
                let s = bessel_j_series(n, x);
                assert!((q - s).abs() < 1e-10, "n={n} x={x}: {q} vs {s}");
            }
        }
    }

    #[test]
    fn parity_and_negative_order() {
        for n in -4..=4 {
            for x in [0.3, 4.1, 17.0, 63.5] {
                let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
                assert!((bessel_j(n, -x) - sign * bessel_j(n, x)).abs() < 1e-13);
                assert!((bessel_j(-n, x) - sign * bessel_j(n, x)).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn three_term_recurrence() {
        for n in 1..8 {
            for k in 0..100 {
                let x = 0.5 + 0.495 * k as f64;
                let lhs = bessel_j(n - 1, x) + bessel_j(n + 1, x);
                let rhs = 2.0 * n as f64 / x * bessel_j(n, x);
                assert!((lhs - rhs).abs() < 1e-10, "n={n} x={x}");
            }
        }
    }

    #[test]
    fn large_argument_reference_value() {
        // J₀(100), 16 significant digits
        assert!((bessel_j(0, 100.0) - 0.019_985_850_304_223_122).abs() < 1e-12);
    }

    #[test]
    fn bounded_by_one() {
        for n in 0..5 {
            for k in 0..400 {
                let x = -100.0 + 0.5 * k as f64;
                assert!(bessel_j(n, x).abs() <= 1.0 + 1e-15);
            }
        }
    }
}
