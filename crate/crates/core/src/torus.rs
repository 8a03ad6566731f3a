//! The class-J torus equation `ẋ = ν sin x + a + s sin t`, its period-2π
//! flow map lifted to the real line, and its rotation number.
//!
//! Rotation numbers use the convention that a rigid rotation by angle θ has
//! ρ = θ/2π, so ρ is the mean advance of `x` per period divided by 2π.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::linear::{monodromy, Mat2};
use crate::ode::{integrate, IntegratorConfig};
use crate::roots::brent_min;

/// Number of equispaced initial points used to sample a [`LiftMap`].
pub const DEFAULT_LIFT_SAMPLES: usize = 64;

/// Convergence target for the weighted Birkhoff average of ρ.
pub const ROTATION_TOL: f64 = 1e-11;

/// Tolerance reduction used to re-check the locking decision.
const TIGHTEN: f64 = 100.0;

/// Parameters `(ν, a, s)` of one class-J equation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub nu: f64,
    pub a: f64,
    pub s: f64,
}

impl Params {
    pub fn new(nu: f64, a: f64, s: f64) -> Result<Self> {
        let p = Self { nu, a, s };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.nu.is_finite() && self.a.is_finite() && self.s.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "non-finite parameter in {self:?}"
            )));
        }
        if self.nu == 0.0 {
            return Err(Error::InvalidParams("ν must be nonzero".into()));
        }
        Ok(())
    }

    pub fn with_a(self, a: f64) -> Self {
        Self { a, ..self }
    }

    pub fn with_s(self, s: f64) -> Self {
        Self { s, ..self }
    }

    /// `(ν, −a, −s)`: the substitution `x ↦ −x` composed with `t ↦ t + π`
    /// conjugates the flow of `self` to the inverse-oriented flow of this one.
    pub fn mirrored(self) -> Self {
        Self {
            nu: self.nu,
            a: -self.a,
            s: -self.s,
        }
    }

    #[inline]
    pub fn velocity(&self, t: f64, x: f64) -> f64 {
        self.nu * x.sin() + self.a + self.s * t.sin()
    }
}

/// Lifted flow map from time `base_time` to `base_time + 2π`.
pub fn period_map_from(
    params: &Params,
    base_time: f64,
    x: f64,
    cfg: &IntegratorConfig,
) -> Result<f64> {
    params.validate()?;
    // Integrate from the representative in [0, 2π) so relative tolerances
    // stay meaningful; the lift commutes with 2π-translation.
    let k = (x / TAU).floor();
    let x0 = x - k * TAU;
    let f = |t: f64, y: &[f64], dy: &mut [f64]| dy[0] = params.velocity(t, y[0]);
    let sol = integrate(&f, base_time, base_time + TAU, &[x0], cfg)?;
    Ok(sol.state[0] + k * TAU)
}

/// `H(x)`: the lifted period map based at `t = 0`.
pub fn period_map(params: &Params, x: f64, cfg: &IntegratorConfig) -> Result<f64> {
    period_map_from(params, 0.0, x, cfg)
}

/// Sampled lift `H` of the period map with monotone cubic interpolation.
#[derive(Debug, Clone)]
pub struct LiftMap {
    pub params: Params,
    pub base_time: f64,
    xs: Vec<f64>,
    hs: Vec<f64>,
    slopes: Vec<f64>,
    /// Largest accumulated local-error estimate over the sample integrations.
    pub error_estimate: f64,
    cfg: IntegratorConfig,
}

impl LiftMap {
    pub fn build(params: &Params, n_samples: usize, cfg: &IntegratorConfig) -> Result<Self> {
        Self::build_from(params, 0.0, n_samples, cfg)
    }

    pub fn build_from(
        params: &Params,
        base_time: f64,
        n_samples: usize,
        cfg: &IntegratorConfig,
    ) -> Result<Self> {
        params.validate()?;
        if n_samples < 4 {
            return Err(Error::InvalidArgument(format!(
                "lift map needs at least 4 samples, got {n_samples}"
            )));
        }
        let f = |t: f64, y: &[f64], dy: &mut [f64]| dy[0] = params.velocity(t, y[0]);
        let mut xs = Vec::with_capacity(n_samples);
        let mut hs = Vec::with_capacity(n_samples);
        let mut error_estimate = 0.0f64;
        for k in 0..n_samples {
            let x = TAU * k as f64 / n_samples as f64;
            let sol = integrate(&f, base_time, base_time + TAU, &[x], cfg)?;
            error_estimate = error_estimate.max(sol.error_estimate);
            xs.push(x);
            hs.push(sol.state[0]);
        }
        let slopes = harmonic_slopes(&xs, &hs);
        Ok(Self {
            params: *params,
            base_time,
            xs,
            hs,
            slopes,
            error_estimate,
            cfg: *cfg,
        })
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    /// `(x, H(x))` sample pairs over one period, ordered by `x`.
    pub fn samples(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.xs.iter().copied().zip(self.hs.iter().copied())
    }

    /// Interpolated `H(x)` for any real `x`.
    pub fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        let k = (x / TAU).floor();
        let xr = x - k * TAU;
        let h = TAU / n as f64;
        let i = ((xr / h).floor() as usize).min(n - 1);
        let x0 = self.xs[i];
        let (y0, y1) = if i + 1 < n {
            (self.hs[i], self.hs[i + 1])
        } else {
            (self.hs[i], self.hs[0] + TAU)
        };
        let (m0, m1) = (self.slopes[i], self.slopes[(i + 1) % n]);
        let u = (xr - x0) / h;
        let u2 = u * u;
        let u3 = u2 * u;
        let h00 = 2.0 * u3 - 3.0 * u2 + 1.0;
        let h10 = u3 - 2.0 * u2 + u;
        let h01 = -2.0 * u3 + 3.0 * u2;
        let h11 = u3 - u2;
        h00 * y0 + h10 * h * m0 + h01 * y1 + h11 * h * m1 + k * TAU
    }

    /// `H(x)` by direct integration.
    pub fn exact(&self, x: f64) -> Result<f64> {
        period_map_from(&self.params, self.base_time, x, &self.cfg)
    }

    /// `n`-fold iterate of the interpolated lift.
    pub fn iterate(&self, x: f64, n: usize) -> f64 {
        (0..n).fold(x, |y, _| self.eval(y))
    }

    /// Sampled displacements `H(x) − x`.
    pub fn displacements(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.samples().map(|(x, h)| (x, h - x))
    }

    /// Minimum and maximum of the displacement `H(x) − x` over a period,
    /// polished from the best samples by Brent search on the exact map.
    pub fn refined_extrema(&self) -> Result<(f64, f64)> {
        let ((_, dmin), (_, dmax)) = self.refined_extremizers()?;
        Ok((dmin, dmax))
    }

    /// As [`LiftMap::refined_extrema`], with the locations:
    /// `((x_min, d_min), (x_max, d_max))`.
    pub fn refined_extremizers(&self) -> Result<((f64, f64), (f64, f64))> {
        let n = self.xs.len();
        let h = TAU / n as f64;
        let d: Vec<f64> = self.displacements().map(|(_, d)| d).collect();
        let (imin, _) = argext(&d, |a, b| a < b);
        let (imax, _) = argext(&d, |a, b| a > b);
        let xtol = 1e-9;
        let (xmin, dmin) = brent_min(
            |x| Ok(self.exact(x)? - x),
            self.xs[imin] - h,
            self.xs[imin] + h,
            xtol,
            60,
        )?;
        let (xmax, neg_max) = brent_min(
            |x| Ok(x - self.exact(x)?),
            self.xs[imax] - h,
            self.xs[imax] + h,
            xtol,
            60,
        )?;
        let low = if dmin <= d[imin] {
            (xmin, dmin)
        } else {
            (self.xs[imin], d[imin])
        };
        let high = if -neg_max >= d[imax] {
            (xmax, -neg_max)
        } else {
            (self.xs[imax], d[imax])
        };
        Ok((low, high))
    }
}

fn argext(v: &[f64], better: impl Fn(f64, f64) -> bool) -> (usize, f64) {
    let mut best = (0, v[0]);
    for (i, &x) in v.iter().enumerate().skip(1) {
        if better(x, best.1) {
            best = (i, x);
        }
    }
    best
}

/// Fritsch–Butland slopes (harmonic mean of neighbouring secants) for the
/// periodic extension `H(x + 2π) = H(x) + 2π`; monotone data give a
/// monotone interpolant.
fn harmonic_slopes(xs: &[f64], hs: &[f64]) -> Vec<f64> {
    let n = xs.len();
    let secant = |i: usize| -> f64 {
        let (x0, y0) = (xs[i], hs[i]);
        let (x1, y1) = if i + 1 < n {
            (xs[i + 1], hs[i + 1])
        } else {
            (xs[0] + TAU, hs[0] + TAU)
        };
        (y1 - y0) / (x1 - x0)
    };
    (0..n)
        .map(|i| {
            let d0 = secant((i + n - 1) % n);
            let d1 = secant(i);
            if d0 * d1 <= 0.0 {
                0.0
            } else {
                2.0 / (1.0 / d0 + 1.0 / d1)
            }
        })
        .collect()
}

/// Rotation number estimate with its diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RotationResult {
    pub rho: f64,
    /// Periods of the orbit used (0 when locking was detected).
    pub iterations: usize,
    pub residual: f64,
    /// Set to `r` when `H(x) = x + 2πr` has a solution; then `rho == r`.
    pub locked_at: Option<i64>,
    pub converged: bool,
}

/// ρ(a, s) from the base point `x = 0`.
pub fn rotation_number(
    params: &Params,
    cfg: &IntegratorConfig,
    max_periods: usize,
) -> Result<RotationResult> {
    rotation_number_from(params, 0.0, cfg, max_periods)
}

/// ρ(a, s) with the Birkhoff orbit started at `x0`.
///
/// Locking is tested first: if `H(x) − x − 2πr` has a zero for some integer
/// `r` the result is exactly `r`. Otherwise the displacement is averaged
/// along the orbit with the smooth bump weight `exp(−1/(u(1−u)))`, doubling
/// the orbit length until successive averages agree. Iterates use the
/// Möbius action of the monodromy on the unit circle, lifted next to the
/// sampled lift; if that model disagrees with the integrated samples the
/// orbit is integrated directly instead.
pub fn rotation_number_from(
    params: &Params,
    x0: f64,
    cfg: &IntegratorConfig,
    max_periods: usize,
) -> Result<RotationResult> {
    if max_periods == 0 {
        return Err(Error::InvalidArgument("max_periods must be ≥ 1".into()));
    }
    let lift = LiftMap::build(params, DEFAULT_LIFT_SAMPLES, cfg)?;
    let ((xmin, dmin), (xmax, dmax)) = lift.refined_extremizers()?;
    // Re-evaluate the extremal displacements at a tighter tolerance; the
    // change estimates the error of the working tolerance.
    let tight = cfg.tightened(TIGHTEN);
    let dmin_t = period_map(params, xmin, &tight)? - xmin;
    let dmax_t = period_map(params, xmax, &tight)? - xmax;
    let err = (dmin_t - dmin).abs().max((dmax_t - dmax).abs());
    let slack = err + 1e-14 * (1.0 + dmin_t.abs().max(dmax_t.abs()));
    let lo = (dmin_t - slack) / TAU;
    let hi = (dmax_t + slack) / TAU;
    let r = lo.ceil() + 0.0; // no −0
    if r <= hi {
        // error of the tight evaluation, scaled from `err` with a safety factor 10
        let residual = 10.0 * slack * tight.rel_tol / cfg.rel_tol / TAU;
        return Ok(RotationResult {
            rho: r,
            iterations: 0,
            residual: residual.max(f64::EPSILON),
            locked_at: Some(r as i64),
            converged: true,
        });
    }

    // The period map is the Möbius action of the monodromy on |p| = 1, so
    // iterates are cheap once the lift branch is pinned by the samples.
    let model = MobiusLift::new(params, &lift, cfg)?;
    let (avg, iterations, diff) = if model.mismatch < MODEL_TOL {
        birkhoff(|x| Ok(model.eval(x)), x0, max_periods)?
    } else {
        birkhoff(|x| period_map(params, x, cfg), x0, max_periods)?
    };
    let model_error = if model.mismatch < MODEL_TOL {
        model.mismatch / TAU
    } else {
        0.0
    };
    Ok(RotationResult {
        rho: (avg / TAU).clamp(lo, hi),
        iterations,
        residual: diff.max(model_error).max(f64::EPSILON),
        locked_at: None,
        converged: diff < ROTATION_TOL,
    })
}

/// Largest disagreement between the Möbius lift and the integrated samples
/// for the model to be trusted.
const MODEL_TOL: f64 = 1e-7;

/// Lift of `x ↦ arg M(e^{ix})` with the branch chosen next to the sampled lift.
struct MobiusLift<'a> {
    matrix: Mat2,
    lift: &'a LiftMap,
    /// max over the lift samples of `|model − H|`.
    mismatch: f64,
}

impl<'a> MobiusLift<'a> {
    fn new(params: &Params, lift: &'a LiftMap, cfg: &IntegratorConfig) -> Result<Self> {
        let matrix = monodromy(params, cfg)?.matrix;
        let mut model = Self {
            matrix,
            lift,
            mismatch: 0.0,
        };
        model.mismatch = lift
            .samples()
            .map(|(x, h)| (model.eval(x) - h).abs())
            .fold(0.0, f64::max);
        if !model.mismatch.is_finite() {
            model.mismatch = f64::INFINITY;
        }
        Ok(model)
    }

    fn eval(&self, x: f64) -> f64 {
        let z = Complex64::from_polar(1.0, x);
        let m = &self.matrix;
        let w = (m[1][0] + m[1][1] * z) / (m[0][0] + m[0][1] * z);
        let phase = (w * z.conj()).arg();
        let guess = self.lift.eval(x) - x;
        x + phase + TAU * ((guess - phase) / TAU).round()
    }
}

/// Weighted Birkhoff average of `step(x) − x` along the orbit of `x0`,
/// doubling the orbit length from 32 until successive averages agree to
/// [`ROTATION_TOL`] (in units of 2π) or `max_periods` is reached.
/// Returns `(average, periods, last change / 2π)`.
fn birkhoff<F>(mut step: F, x0: f64, max_periods: usize) -> Result<(f64, usize, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut steps: Vec<f64> = Vec::new();
    let mut x = x0;
    let mut extend = |steps: &mut Vec<f64>, upto: usize| -> Result<()> {
        while steps.len() < upto {
            let next = step(x)?;
            steps.push(next - x);
            // keep the orbit representative bounded
            x = next - (next / TAU).floor() * TAU;
        }
        Ok(())
    };
    let mut n = 32.min(max_periods);
    extend(&mut steps, n)?;
    let mut prev = weighted_average(&steps[..n]);
    let mut diff = f64::INFINITY;
    while n < max_periods {
        n = (2 * n).min(max_periods);
        extend(&mut steps, n)?;
        let cur = weighted_average(&steps[..n]);
        diff = (cur - prev).abs() / TAU;
        prev = cur;
        if diff < ROTATION_TOL {
            break;
        }
    }
    Ok((prev, n, diff))
}

fn weighted_average(values: &[f64]) -> f64 {
    let n = values.len();
    let mut num = 0.0;
    let mut den = 0.0;
    for (k, v) in values.iter().enumerate() {
        let u = (k as f64 + 0.5) / n as f64;
        let w = (-1.0 / (u * (1.0 - u))).exp();
        num += w * v;
        den += w;
    }
    num / den
}

/// Outcome of [`is_identity_map`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub is_identity: bool,
    /// max over samples of `|H(x) − x − 2πr|`.
    pub max_deviation: f64,
    pub r: i64,
}

/// Whether the period map is the identity on the circle, i.e. its lift is a
/// translation by `2πr` for the integer `r` nearest to the mean displacement.
pub fn is_identity_map(
    params: &Params,
    tol: f64,
    n_samples: usize,
    cfg: &IntegratorConfig,
) -> Result<IdentityCheck> {
    if n_samples < 8 {
        return Err(Error::InvalidArgument(format!(
            "identity test needs at least 8 samples, got {n_samples}"
        )));
    }
    let lift = LiftMap::build(params, n_samples, cfg)?;
    let disp: Vec<f64> = lift.displacements().map(|(_, d)| d).collect();
    let mean = disp.iter().sum::<f64>() / disp.len() as f64;
    let r = (mean / TAU).round();
    let max_deviation = disp.iter().map(|d| (d - TAU * r).abs()).fold(0.0, f64::max);
    Ok(IdentityCheck {
        is_identity: max_deviation < tol,
        max_deviation,
        r: r as i64,
    })
}

/// ρ for `s = 0` from the closed form `√(a² − ν²)` (zero when `|a| ≤ |ν|`).
pub fn autonomous_rotation_number(nu: f64, a: f64) -> f64 {
    if a.abs() <= nu.abs() {
        0.0
    } else {
        a.signum() * (a * a - nu * nu).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn cfg() -> IntegratorConfig {
        IntegratorConfig::default()
    }

    #[test]
    fn equilibria_are_fixed() {
        let p = Params::new(1.0, 0.0, 0.0).unwrap();
        assert_abs_diff_eq!(period_map(&p, 0.0, &cfg()).unwrap(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(period_map(&p, PI, &cfg()).unwrap(), PI, epsilon = 1e-10);
    }

    #[test]
    fn zero_nu_is_rejected() {
        assert!(matches!(
            Params::new(0.0, 1.0, 1.0),
            Err(Error::InvalidParams(_))
        ));
    }

    #[test]
    fn lift_is_equivariant_and_monotone() {
        let p = Params::new(1.0, 0.4, 2.0).unwrap();
        let lift = LiftMap::build(&p, 64, &cfg()).unwrap();
        for x in [-3.0, 0.1, 1.7, 5.0] {
            let a = lift.exact(x).unwrap();
            let b = lift.exact(x + TAU).unwrap();
            assert_abs_diff_eq!(b - a, TAU, epsilon = 1e-9);
            assert_abs_diff_eq!(lift.eval(x + TAU) - lift.eval(x), TAU, epsilon = 1e-12);
        }
        let mut prev = f64::NEG_INFINITY;
        for k in 0..1000 {
            let v = lift.eval(-4.0 + 0.013 * k as f64);
            assert!(v > prev);
            prev = v;
        }
    }

    #[test]
    fn interpolation_tracks_exact_map() {
        let p = Params::new(1.0, 0.7, 1.3).unwrap();
        let lift = LiftMap::build(&p, 128, &cfg()).unwrap();
        for x in [0.05, 1.0, 2.9, 4.4, 6.2] {
            assert_abs_diff_eq!(lift.eval(x), lift.exact(x).unwrap(), epsilon = 1e-4);
        }
    }

    #[test]
    fn locks_on_zero_axis() {
        let p = Params::new(1.0, 0.0, 2.5).unwrap();
        let res = rotation_number(&p, &cfg(), 2048).unwrap();
        assert_eq!(res.locked_at, Some(0));
        assert_eq!(res.rho, 0.0);
        assert!(res.residual > 0.0 && res.residual < 1e-9);
    }

    #[test]
    fn queer_point_locks_at_one() {
        let p = Params::new(1.0, 2f64.sqrt(), 0.0).unwrap();
        let res = rotation_number(&p, &cfg(), 2048).unwrap();
        assert_eq!(res.locked_at, Some(1));
        assert_eq!(res.rho, 1.0);
    }

    #[test]
    fn autonomous_rotation_matches_closed_form() {
        let p = Params::new(1.0, 3.0, 0.0).unwrap();
        let res = rotation_number(&p, &cfg(), 4096).unwrap();
        assert!(res.locked_at.is_none());
        assert_abs_diff_eq!(res.rho, 8f64.sqrt(), epsilon = 1e-6);
    }

    #[test]
    fn identity_detection() {
        let p = Params::new(1.0, 0.0, 0.0).unwrap();
        assert!(!is_identity_map(&p, 1e-6, 32, &cfg()).unwrap().is_identity);
        let p = Params::new(1.0, 0.5, 0.0).unwrap();
        assert!(!is_identity_map(&p, 1e-6, 32, &cfg()).unwrap().is_identity);
        // autonomous with period exactly 2π: H(x) = x + 2π
        let p = Params::new(1.0, 2f64.sqrt(), 0.0).unwrap();
        let chk = is_identity_map(&p, 1e-6, 32, &cfg()).unwrap();
        assert!(chk.is_identity, "{chk:?}");
        assert_eq!(chk.r, 1);
        assert!(is_identity_map(&p, 1e-6, 4, &cfg()).is_err());
    }

    #[test]
    fn closed_form_helper() {
        assert_eq!(autonomous_rotation_number(1.0, 0.5), 0.0);
        assert_abs_diff_eq!(autonomous_rotation_number(1.0, -2.0), -3f64.sqrt());
    }
}
