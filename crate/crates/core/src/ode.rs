//! Adaptive Dormand–Prince 5(4) integration.
//!
//! The stepper works on real state vectors. Complex systems are realified
//! (interleaved `re, im`) by [`integrate_complex`], and holomorphic systems
//! `dz/dτ = f(τ, z)` are pulled back along a [`Path`] in the τ-plane by
//! [`integrate_path`].

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::OdeError;

/// Step-size and tolerance settings shared by every integration in the crate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub initial_step: f64,
    pub max_steps: usize,
    pub min_step: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            initial_step: 1e-2,
            max_steps: 2_000_000,
            min_step: 1e-13,
        }
    }
}

impl IntegratorConfig {
    /// Both tolerances divided by `factor`, floored near machine precision.
    pub fn tightened(&self, factor: f64) -> Self {
        Self {
            rel_tol: (self.rel_tol / factor).max(1e-15),
            abs_tol: (self.abs_tol / factor).max(1e-16),
            ..*self
        }
    }

    /// Same step settings with both tolerances set to `tol`.
    pub fn with_tolerance(tol: f64) -> Self {
        Self {
            rel_tol: tol,
            abs_tol: tol,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), OdeError> {
        let ok = self.rel_tol > 0.0
            && self.abs_tol > 0.0
            && self.max_steps > 0
            && self.min_step > 0.0
            && self.min_step <= self.initial_step
            && self.rel_tol.is_finite()
            && self.abs_tol.is_finite()
            && self.initial_step.is_finite();
        if ok {
            Ok(())
        } else {
            Err(OdeError::InvalidConfig(format!("{self:?}")))
        }
    }
}

/// Right-hand side of a real system `y' = f(t, y)`.
pub trait OdeSystem {
    fn rhs(&self, t: f64, y: &[f64], dy: &mut [f64]);
}

impl<F> OdeSystem for F
where
    F: Fn(f64, &[f64], &mut [f64]),
{
    fn rhs(&self, t: f64, y: &[f64], dy: &mut [f64]) {
        self(t, y, dy)
    }
}

/// Right-hand side of a complex system `z' = f(t, z)` with real time.
pub trait ComplexSystem {
    fn rhs(&self, t: f64, z: &[Complex64], dz: &mut [Complex64]);
}

impl<F> ComplexSystem for F
where
    F: Fn(f64, &[Complex64], &mut [Complex64]),
{
    fn rhs(&self, t: f64, z: &[Complex64], dz: &mut [Complex64]) {
        self(t, z, dz)
    }
}

/// Right-hand side of a holomorphic system `dz/dτ = f(τ, z)`.
pub trait HolomorphicSystem {
    fn rhs(&self, tau: Complex64, z: &[Complex64], dz: &mut [Complex64]);
}

impl<F> HolomorphicSystem for F
where
    F: Fn(Complex64, &[Complex64], &mut [Complex64]),
{
    fn rhs(&self, tau: Complex64, z: &[Complex64], dz: &mut [Complex64]) {
        self(tau, z, dz)
    }
}

/// An initial value problem; its dimension is the length of `y0`.
#[derive(Debug, Clone)]
pub struct OdeProblem<S> {
    pub system: S,
    pub t0: f64,
    pub t1: f64,
    pub y0: Vec<f64>,
}

impl<S: OdeSystem> OdeProblem<S> {
    pub fn new(system: S, t0: f64, t1: f64, y0: Vec<f64>) -> Self {
        Self { system, t0, t1, y0 }
    }

    pub fn dimension(&self) -> usize {
        self.y0.len()
    }

    pub fn solve(&self, cfg: &IntegratorConfig) -> Result<Solution<f64>, OdeError> {
        integrate(&self.system, self.t0, self.t1, &self.y0, cfg)
    }
}

/// End state of an integration.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution<T> {
    pub state: Vec<T>,
    /// Time reached; equals the requested end time unless an observer stopped early.
    pub t: f64,
    /// Sum over accepted steps of the max-norm local error estimate.
    pub error_estimate: f64,
    pub steps: usize,
}

/// Returned by step observers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Control {
    Continue,
    Stop,
}

// Dormand–Prince 5(4) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
// Difference between the 5th and embedded 4th order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

// PI controller (Hairer's DOPRI5 defaults).
const SAFETY: f64 = 0.9;
const BETA: f64 = 0.04;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;

/// Integrate `y' = f(t, y)` from `t0` to `t1` (either direction).
pub fn integrate<S: OdeSystem + ?Sized>(
    sys: &S,
    t0: f64,
    t1: f64,
    y0: &[f64],
    cfg: &IntegratorConfig,
) -> Result<Solution<f64>, OdeError> {
    integrate_observed(sys, t0, t1, y0, cfg, |_, _| Control::Continue)
}

/// As [`integrate`], calling `observer(t, y)` after every accepted step.
/// Returning [`Control::Stop`] ends the integration at that step.
pub fn integrate_observed<S, O>(
    sys: &S,
    t0: f64,
    t1: f64,
    y0: &[f64],
    cfg: &IntegratorConfig,
    mut observer: O,
) -> Result<Solution<f64>, OdeError>
where
    S: OdeSystem + ?Sized,
    O: FnMut(f64, &[f64]) -> Control,
{
    cfg.validate()?;
    if t0 == t1 || !t0.is_finite() || !t1.is_finite() {
        return Err(OdeError::EmptyInterval { t0, t1 });
    }
    if y0.iter().any(|v| !v.is_finite()) {
        return Err(OdeError::NonFinite { t: t0 });
    }

    let n = y0.len();
    let dir = (t1 - t0).signum();
    let span = (t1 - t0).abs();
    let mut t = t0;
    let mut y = y0.to_vec();
    let mut h = cfg.initial_step.min(span);

    let mut k1 = vec![0.0; n];
    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];
    let mut k5 = vec![0.0; n];
    let mut k6 = vec![0.0; n];
    let mut k7 = vec![0.0; n];
    let mut ytmp = vec![0.0; n];
    let mut ynew = vec![0.0; n];

    sys.rhs(t, &y, &mut k1);
    let mut err_old: f64 = 1e-4;
    let mut steps = 0usize;
    let mut accumulated = 0.0;
    let mut rejected_last = false;

    loop {
        let remaining = (t1 - t) * dir;
        if remaining <= 0.0 {
            break;
        }
        if steps >= cfg.max_steps {
            return Err(OdeError::MaxStepsExceeded {
                max_steps: cfg.max_steps,
                t,
            });
        }
        let last = h >= remaining;
        if last {
            h = remaining;
        } else if h < cfg.min_step {
            return Err(OdeError::StepUnderflow { t, step: h });
        }
        let hs = h * dir;

        for i in 0..n {
            ytmp[i] = y[i] + hs * A21 * k1[i];
        }
        sys.rhs(t + C2 * hs, &ytmp, &mut k2);
        for i in 0..n {
            ytmp[i] = y[i] + hs * (A31 * k1[i] + A32 * k2[i]);
        }
        sys.rhs(t + C3 * hs, &ytmp, &mut k3);
        for i in 0..n {
            ytmp[i] = y[i] + hs * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
        }
        sys.rhs(t + C4 * hs, &ytmp, &mut k4);
        for i in 0..n {
            ytmp[i] = y[i] + hs * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
        }
        sys.rhs(t + C5 * hs, &ytmp, &mut k5);
        for i in 0..n {
            ytmp[i] =
                y[i] + hs * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
        }
        let t_new = if last { t1 } else { t + hs };
        sys.rhs(t + hs, &ytmp, &mut k6);
        for i in 0..n {
            ynew[i] =
                y[i] + hs * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i]);
        }
        sys.rhs(t_new, &ynew, &mut k7);

        let mut err_sq = 0.0;
        let mut err_max = 0.0f64;
        for i in 0..n {
            let e =
                hs * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = cfg.abs_tol + cfg.rel_tol * y[i].abs().max(ynew[i].abs());
            err_sq += (e / sc) * (e / sc);
            err_max = err_max.max(e.abs());
        }
        let err = (err_sq / n as f64).sqrt();
        if !err.is_finite() {
            // Blow-up inside the step: retry smaller.
            h *= FAC_MIN;
            rejected_last = true;
            steps += 1;
            continue;
        }

        let fac11 = err.powf(0.2 - BETA * 0.75);
        if err <= 1.0 {
            let mut fac = fac11 / err_old.powf(BETA);
            fac = (fac / SAFETY).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
            let mut h_new = h / fac;
            if rejected_last {
                h_new = h_new.min(h);
            }
            err_old = err.max(1e-4);
            t = t_new;
            std::mem::swap(&mut y, &mut ynew);
            std::mem::swap(&mut k1, &mut k7);
            steps += 1;
            accumulated += err_max;
            rejected_last = false;
            if y.iter().any(|v| !v.is_finite()) {
                return Err(OdeError::NonFinite { t });
            }
            if observer(t, &y) == Control::Stop {
                break;
            }
            if !last {
                h = h_new;
            }
        } else {
            h /= (fac11 / SAFETY).min(1.0 / FAC_MIN);
            rejected_last = true;
            steps += 1;
        }
    }

    Ok(Solution {
        state: y,
        t,
        error_estimate: accumulated,
        steps,
    })
}

struct Realified<'a, C: ?Sized> {
    inner: &'a C,
    n: usize,
}

impl<C: ComplexSystem + ?Sized> OdeSystem for Realified<'_, C> {
    fn rhs(&self, t: f64, y: &[f64], dy: &mut [f64]) {
        let z = unpack(y);
        let mut dz = vec![Complex64::new(0.0, 0.0); self.n];
        self.inner.rhs(t, &z, &mut dz);
        pack_into(&dz, dy);
    }
}

fn pack(z: &[Complex64]) -> Vec<f64> {
    let mut out = vec![0.0; 2 * z.len()];
    pack_into(z, &mut out);
    out
}

fn pack_into(z: &[Complex64], out: &mut [f64]) {
    for (i, v) in z.iter().enumerate() {
        out[2 * i] = v.re;
        out[2 * i + 1] = v.im;
    }
}

fn unpack(y: &[f64]) -> Vec<Complex64> {
    y.chunks_exact(2)
        .map(|c| Complex64::new(c[0], c[1]))
        .collect()
}

/// Integrate a complex system with real time.
pub fn integrate_complex<S: ComplexSystem + ?Sized>(
    sys: &S,
    t0: f64,
    t1: f64,
    z0: &[Complex64],
    cfg: &IntegratorConfig,
) -> Result<Solution<Complex64>, OdeError> {
    integrate_complex_observed(sys, t0, t1, z0, cfg, |_, _| Control::Continue)
}

pub fn integrate_complex_observed<S, O>(
    sys: &S,
    t0: f64,
    t1: f64,
    z0: &[Complex64],
    cfg: &IntegratorConfig,
    mut observer: O,
) -> Result<Solution<Complex64>, OdeError>
where
    S: ComplexSystem + ?Sized,
    O: FnMut(f64, &[Complex64]) -> Control,
{
    let real = Realified {
        inner: sys,
        n: z0.len(),
    };
    let sol = integrate_observed(&real, t0, t1, &pack(z0), cfg, |t, y| {
        observer(t, &unpack(y))
    })?;
    Ok(Solution {
        state: unpack(&sol.state),
        t: sol.t,
        error_estimate: sol.error_estimate,
        steps: sol.steps,
    })
}

/// Integration contour in the τ-plane, parameterized by `u ∈ [0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Path {
    /// `τ = radius · exp(i(start_angle + sweep·u))`; positive sweep is counterclockwise.
    Circle {
        radius: f64,
        start_angle: f64,
        sweep: f64,
    },
    /// `τ = (from + (to − from)·u) · exp(i·angle)`.
    Radial { angle: f64, from: f64, to: f64 },
}

impl Path {
    /// Full counterclockwise loop of radius `radius` starting on the positive real axis.
    pub fn loop_around_origin(radius: f64) -> Self {
        Path::Circle {
            radius,
            start_angle: 0.0,
            sweep: 2.0 * PI,
        }
    }

    pub fn point(&self, u: f64) -> Complex64 {
        match *self {
            Path::Circle {
                radius,
                start_angle,
                sweep,
            } => Complex64::from_polar(radius, start_angle + sweep * u),
            Path::Radial { angle, from, to } => {
                Complex64::from_polar(from + (to - from) * u, angle)
            }
        }
    }

    /// dγ/du.
    pub fn velocity(&self, u: f64) -> Complex64 {
        match *self {
            Path::Circle { sweep, .. } => Complex64::i() * sweep * self.point(u),
            Path::Radial { angle, from, to } => Complex64::from_polar(to - from, angle),
        }
    }

    pub fn end(&self) -> Complex64 {
        self.point(1.0)
    }

    fn avoids_origin(&self) -> bool {
        match *self {
            Path::Circle { radius, .. } => radius > 0.0,
            Path::Radial { from, to, .. } => from > 0.0 && to > 0.0,
        }
    }
}

struct PulledBack<'a, H: ?Sized> {
    inner: &'a H,
    path: Path,
}

impl<H: HolomorphicSystem + ?Sized> ComplexSystem for PulledBack<'_, H> {
    fn rhs(&self, u: f64, z: &[Complex64], dz: &mut [Complex64]) {
        let tau = self.path.point(u);
        let v = self.path.velocity(u);
        self.inner.rhs(tau, z, dz);
        for d in dz.iter_mut() {
            *d *= v;
        }
    }
}

/// Integrate `dz/dτ = f(τ, z)` along `path` via `dz/du = f(γ(u), z)·γ'(u)`.
pub fn integrate_path<H: HolomorphicSystem + ?Sized>(
    sys: &H,
    path: Path,
    z0: &[Complex64],
    cfg: &IntegratorConfig,
) -> Result<Solution<Complex64>, OdeError> {
    integrate_path_observed(sys, path, z0, 0.0, cfg, |_, _| Control::Continue)
}

/// Path integration starting at parameter `u0` (to `u = 1`); the observer
/// receives `(u, z)` after every accepted step.
pub fn integrate_path_observed<H, O>(
    sys: &H,
    path: Path,
    z0: &[Complex64],
    u0: f64,
    cfg: &IntegratorConfig,
    observer: O,
) -> Result<Solution<Complex64>, OdeError>
where
    H: HolomorphicSystem + ?Sized,
    O: FnMut(f64, &[Complex64]) -> Control,
{
    if !path.avoids_origin() {
        return Err(OdeError::PathThroughSingularity);
    }
    let pulled = PulledBack { inner: sys, path };
    integrate_complex_observed(&pulled, u0, 1.0, z0, cfg, observer)
}
