//! Canonical Riccati solutions ψ₁ (ψ₁(0) = 0) and ψ₂ (ψ₂(0) = ∞), their
//! continuation to the closed unit disk, and argument-principle counts.
//!
//! `q = 1/p` solves the same Riccati equation with `(a, s)` replaced by
//! `(−a, −s)`, so `1/ψ₂` is the ψ₁ of the mirrored parameters. Everything
//! below works with the "chart function" `f`, which is ψ₁ itself for
//! [`Which::One`] and `1/ψ₂` for [`Which::Two`], together with its
//! effective parameters. Zeros of ψ₂ are poles of its chart function.
//!
//! Near τ = 0 the continuation is unstable in half of the directions (the
//! irregular singular point dominates), so the small circle `|τ| = ε` is
//! never integrated. The positive real ray is neutral and carries the seed to
//! the unit circle; further rays are integrated in their stable direction
//! and compared with the series at the other end.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};
use crate::linear::{riccati_rhs, LinearSystem, ProjPoint};
use crate::ode::{integrate_path, integrate_path_observed, Control, IntegratorConfig, Path};
use crate::torus::Params;

pub const DEFAULT_ORDER: usize = 30;
/// Truncations at `N` and `N + ORDER_GAP` are compared to qualify a seed radius.
pub const ORDER_GAP: usize = 10;
/// Candidate seed radii, tried from the largest down.
pub const SEED_RADII: [f64; 8] = [0.2, 0.15, 0.1, 0.07, 0.05, 0.03, 0.02, 0.01];
pub const SEED_TOL: f64 = 1e-9;
/// Angles at which truncations are compared on `|τ| = ε`.
const SEED_ANGLES: usize = 16;
pub const CIRCLE_SAMPLES: usize = 256;
pub const RAY_COUNT: usize = 8;
/// Chart switch threshold for `p ↔ 1/p`.
const CHART_LIMIT: f64 = 10.0;
/// Accepted distance of a winding integral from an integer.
pub const WINDING_TOL: f64 = 0.1;
/// Slack on `|ψ| ≤ 1` and `|ψ| ≥ 1` in the star condition.
pub const MODULUS_SLACK: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Which {
    One,
    Two,
}

impl Which {
    pub fn index(self) -> u8 {
        match self {
            Which::One => 1,
            Which::Two => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CanonicalSolution {
    pub which: Which,
    pub params: Params,
    /// Taylor coefficients `c₀ … c_{N+ORDER_GAP}` of the chart function
    /// (ψ₁, or 1/ψ₂).
    pub series_coefficients: Vec<Complex64>,
    pub truncation_order: usize,
    /// Largest qualifying radius, `None` when no candidate qualified.
    pub seed_radius: Option<f64>,
    /// Truncation disagreement at `seed_radius` (or the best one seen).
    pub seed_agreement: f64,
    /// ψ_j at `τ = e^{2πik/CIRCLE_SAMPLES}`, filled by [`continue_canonical`].
    pub circle_values: Vec<ProjPoint>,
    /// Chordal distance between the start and end of the loop `|τ| = 1`.
    pub closure: Option<f64>,
    /// Largest chordal mismatch between ray continuations and the series or
    /// the circle values.
    pub ray_mismatch: Option<f64>,
}

/// Position of the circle values relative to `|ψ| = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Inside,
    Outside,
    OnCircle,
    Mixed,
}

impl CanonicalSolution {
    /// Parameters of the Riccati equation satisfied by the chart function.
    pub fn effective_params(&self) -> Params {
        match self.which {
            Which::One => self.params,
            Which::Two => self.params.mirrored(),
        }
    }

    /// Truncated series of the chart function at `tau`, using `c₀ … c_order`.
    pub fn chart_series(&self, tau: Complex64, order: usize) -> Complex64 {
        let top = order.min(self.series_coefficients.len() - 1);
        self.series_coefficients[..=top]
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, c| acc * tau + c)
    }

    /// ψ_j at small `tau` from the series at the truncation order.
    pub fn series_value(&self, tau: Complex64) -> ProjPoint {
        to_psi(self.which, self.chart_series(tau, self.truncation_order))
    }

    /// Largest difference of the `N` and `N + ORDER_GAP` truncations on `|τ| = eps`.
    pub fn truncation_gap(&self, eps: f64) -> f64 {
        let top = self.series_coefficients.len() - 1;
        (0..SEED_ANGLES)
            .map(|k| {
                let tau = Complex64::from_polar(eps, TAU * k as f64 / SEED_ANGLES as f64);
                (self.chart_series(tau, self.truncation_order) - self.chart_series(tau, top)).norm()
            })
            .fold(0.0, f64::max)
    }

    pub fn circle_angle(k: usize) -> f64 {
        TAU * k as f64 / CIRCLE_SAMPLES as f64
    }

    fn moduli(&self) -> impl Iterator<Item = f64> + '_ {
        self.circle_values.iter().map(|p| match p {
            ProjPoint::Finite(z) => z.norm(),
            ProjPoint::Infinity => f64::INFINITY,
        })
    }

    /// `max |ψ_j|` on the unit circle (NaN before continuation).
    pub fn max_modulus(&self) -> f64 {
        self.moduli().fold(f64::NAN, f64::max)
    }

    pub fn min_modulus(&self) -> f64 {
        self.moduli().fold(f64::NAN, f64::min)
    }

    pub fn side(&self, slack: f64) -> Side {
        let (lo, hi) = (self.min_modulus(), self.max_modulus());
        if (lo - 1.0).abs() <= slack && (hi - 1.0).abs() <= slack {
            Side::OnCircle
        } else if hi <= 1.0 + slack {
            Side::Inside
        } else if lo >= 1.0 - slack {
            Side::Outside
        } else {
            Side::Mixed
        }
    }
}

fn to_psi(which: Which, f: Complex64) -> ProjPoint {
    match which {
        Which::One => ProjPoint::Finite(f),
        Which::Two => ProjPoint::from_homogeneous(f, Complex64::new(1.0, 0.0)),
    }
}

fn chart_to_psi(which: Which, p: ProjPoint) -> ProjPoint {
    match which {
        Which::One => p,
        Which::Two => match p {
            ProjPoint::Finite(z) => ProjPoint::from_homogeneous(z, Complex64::new(1.0, 0.0)),
            ProjPoint::Infinity => ProjPoint::Finite(Complex64::new(0.0, 0.0)),
        },
    }
}

/// Formal power series of the canonical solution to order `order`, with the
/// seed radius chosen by comparing truncations at `order` and
/// `order + ORDER_GAP`.
pub fn canonical_series(params: &Params, which: Which, order: usize) -> Result<CanonicalSolution> {
    params.validate()?;
    if params.s == 0.0 {
        return Err(Error::RecurrenceSingular);
    }
    if order < 2 {
        return Err(Error::InvalidArgument(format!(
            "series order must be ≥ 2, got {order}"
        )));
    }
    let eff = match which {
        Which::One => *params,
        Which::Two => params.mirrored(),
    };
    let series_coefficients = riccati_series(&eff, order + ORDER_GAP);
    let mut sol = CanonicalSolution {
        which,
        params: *params,
        series_coefficients,
        truncation_order: order,
        seed_radius: None,
        seed_agreement: f64::INFINITY,
        circle_values: Vec::new(),
        closure: None,
        ray_mismatch: None,
    };
    for eps in SEED_RADII {
        let gap = sol.truncation_gap(eps);
        if gap < SEED_TOL {
            sol.seed_radius = Some(eps);
            sol.seed_agreement = gap;
            break;
        }
        if gap.is_nan() || gap < sol.seed_agreement {
            sol.seed_agreement = gap;
        }
    }
    Ok(sol)
}

/// Coefficients `c₀ = 0, c₁, …, c_order` of the solution of the Riccati
/// equation vanishing at τ = 0; requires `s ≠ 0`.
fn riccati_series(params: &Params, order: usize) -> Vec<Complex64> {
    let Params { nu, a, s } = *params;
    let zero = Complex64::new(0.0, 0.0);
    let i = Complex64::i();
    let mut c = vec![zero; order + 1];
    c[1] = Complex64::new(-nu / s, 0.0);
    let lead = 2.0 / (i * s);
    for n in 2..=order {
        let conv: Complex64 = (1..=n - 2).map(|j| c[j] * c[n - 1 - j]).sum();
        c[n] = lead * ((n as f64 - 1.0 - a) * c[n - 1] + i * nu / 2.0 * conv) + c[n - 2];
    }
    c
}

/// Continue a Riccati solution along `path` from `start`, switching between
/// the charts `p` and `1/p` whenever the active coordinate exceeds 10 in
/// modulus. Returns the end point and the accumulated error estimate.
pub fn continue_riccati(
    params: &Params,
    path: Path,
    start: ProjPoint,
    cfg: &IntegratorConfig,
) -> Result<(ProjPoint, f64)> {
    let mirrored = params.mirrored();
    // (reciprocal chart?, coordinate)
    let (mut flipped, mut value) = match start {
        ProjPoint::Finite(p) if p.norm() <= CHART_LIMIT => (false, p),
        ProjPoint::Finite(p) => (true, p.inv()),
        ProjPoint::Infinity => (true, Complex64::new(0.0, 0.0)),
    };
    let mut u = 0.0;
    let mut error = 0.0;
    for _ in 0..100_000 {
        let active = if flipped { mirrored } else { *params };
        let f = |tau: Complex64, z: &[Complex64], dz: &mut [Complex64]| {
            dz[0] = riccati_rhs(&active, tau, z[0]);
        };
        let sol = integrate_path_observed(&f, path, &[value], u, cfg, |_, z| {
            if z[0].norm() > CHART_LIMIT {
                Control::Stop
            } else {
                Control::Continue
            }
        })?;
        value = sol.state[0];
        error += sol.error_estimate;
        u = sol.t;
        if u >= 1.0 {
            let end = if flipped {
                ProjPoint::from_homogeneous(value, Complex64::new(1.0, 0.0))
            } else {
                ProjPoint::Finite(value)
            };
            return Ok((end, error));
        }
        flipped = !flipped;
        value = value.inv();
    }
    Err(Error::InvalidArgument(
        "too many chart switches along the path".into(),
    ))
}

/// Fill the circle values of `sol` by continuing the seed along the positive
/// real axis to τ = 1 and then once around `|τ| = 1`; rays at the angles
/// `2π(k + ½)/RAY_COUNT` are used as independent checks.
pub fn continue_canonical(
    sol: &CanonicalSolution,
    params: &Params,
    cfg: &IntegratorConfig,
) -> Result<CanonicalSolution> {
    if *params != sol.params {
        return Err(Error::InvalidArgument(
            "parameters differ from those of the series".into(),
        ));
    }
    let eps = sol.seed_radius.ok_or(Error::SeedInaccurate {
        tolerance: SEED_TOL,
        best: sol.seed_agreement,
    })?;
    let eff = sol.effective_params();
    let chart_at = |tau: Complex64| ProjPoint::Finite(sol.chart_series(tau, sol.truncation_order));

    let (at_one, _) = continue_riccati(
        &eff,
        Path::Radial {
            angle: 0.0,
            from: eps,
            to: 1.0,
        },
        chart_at(Complex64::new(eps, 0.0)),
        cfg,
    )?;

    let mut chart_values = Vec::with_capacity(CIRCLE_SAMPLES);
    let mut current = at_one;
    for k in 0..CIRCLE_SAMPLES {
        chart_values.push(current);
        let arc = Path::Circle {
            radius: 1.0,
            start_angle: CanonicalSolution::circle_angle(k),
            sweep: TAU / CIRCLE_SAMPLES as f64,
        };
        current = continue_riccati(&eff, arc, current, cfg)?.0;
    }
    let closure = current.chordal_distance(at_one);

    let stride = CIRCLE_SAMPLES / RAY_COUNT;
    let mismatches: Vec<f64> = (0..RAY_COUNT)
        .into_par_iter()
        .map(|k| -> Result<f64> {
            let angle = PI * (2 * k + 1) as f64 / RAY_COUNT as f64;
            let on_circle = chart_values[k * stride + stride / 2];
            let near_zero = chart_at(Complex64::from_polar(eps, angle));
            if eff.s * angle.sin() <= 0.0 {
                let path = Path::Radial {
                    angle,
                    from: eps,
                    to: 1.0,
                };
                let (end, _) = continue_riccati(&eff, path, near_zero, cfg)?;
                Ok(end.chordal_distance(on_circle))
            } else {
                let path = Path::Radial {
                    angle,
                    from: 1.0,
                    to: eps,
                };
                let (end, _) = continue_riccati(&eff, path, on_circle, cfg)?;
                Ok(end.chordal_distance(near_zero))
            }
        })
        .collect::<Result<_>>()?;

    let mut out = sol.clone();
    out.circle_values = chart_values
        .into_iter()
        .map(|p| chart_to_psi(sol.which, p))
        .collect();
    out.closure = Some(closure);
    out.ray_mismatch = Some(mismatches.into_iter().fold(0.0, f64::max));
    Ok(out)
}

/// Poles in the open unit disk of the chart function of `sol`: poles of ψ₁
/// for [`Which::One`], zeros of ψ₂ for [`Which::Two`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoleCount {
    pub count: i64,
    /// Distance of the raw winding integral from `count`.
    pub contour_residual: f64,
    /// Winding of `z₁` along `|τ| = ε`, from the series.
    pub inner_winding: f64,
}

/// Writes ψ's chart function as `z₂/z₁` for a solution `z` of the linear
/// system seeded with `(1, f(ε))` at τ = ε and counts zeros of `z₁` in
/// `ε < |τ| < 1` by the argument principle. Along `|τ| = 1` the winding of
/// `z₁` is integrated together with `z` through `z₁'/z₁ = iν f/(2τ)`; along
/// `|τ| = ε` the same integrand is evaluated from the series, whose value
/// there is analytic, so `z₁` has no zeros inside.
pub fn count_poles_unit_disk(
    sol: &CanonicalSolution,
    params: &Params,
    cfg: &IntegratorConfig,
) -> Result<PoleCount> {
    if *params != sol.params {
        return Err(Error::InvalidArgument(
            "parameters differ from those of the series".into(),
        ));
    }
    let eps = sol.seed_radius.ok_or(Error::SeedInaccurate {
        tolerance: SEED_TOL,
        best: sol.seed_agreement,
    })?;
    let eff = sol.effective_params();
    let inner = inner_winding(sol, eps);
    let attempt = |cfg: &IntegratorConfig| -> Result<Complex64> {
        let sys = LinearSystem::new(eff)?;
        let seed = sol.chart_series(Complex64::new(eps, 0.0), sol.truncation_order);
        let linear = |tau: Complex64, z: &[Complex64], dz: &mut [Complex64]| sys.apply(tau, z, dz);
        let radial = integrate_path(
            &linear,
            Path::Radial {
                angle: 0.0,
                from: eps,
                to: 1.0,
            },
            &[Complex64::new(1.0, 0.0), seed],
            cfg,
        )?;
        let half_nu_i = Complex64::new(0.0, eff.nu / 2.0);
        let augmented = |tau: Complex64, z: &[Complex64], dz: &mut [Complex64]| {
            sys.apply(tau, &z[..2], &mut dz[..2]);
            dz[2] = half_nu_i * z[1] / (tau * z[0]);
        };
        let z0 = [radial.state[0], radial.state[1], Complex64::new(0.0, 0.0)];
        let around = integrate_path(&augmented, Path::loop_around_origin(1.0), &z0, cfg)?;
        Ok(around.state[2] / Complex64::new(0.0, TAU))
    };
    let mut tightened = *cfg;
    for _ in 0..2 {
        let winding = attempt(&tightened)? - inner;
        let count = winding.re.round();
        let residual = (winding - Complex64::new(count, 0.0)).norm();
        if residual < WINDING_TOL && count >= 0.0 {
            return Ok(PoleCount {
                count: count as i64,
                contour_residual: residual,
                inner_winding: inner.norm(),
            });
        }
        tightened.rel_tol = (tightened.rel_tol * 1e-2).max(1e-14);
        tightened.abs_tol = (tightened.abs_tol * 1e-2).max(1e-15);
        if tightened == *cfg {
            break;
        }
    }
    let winding = attempt(&tightened)? - inner;
    Err(Error::WindingNotIntegral { value: winding.re })
}

/// `(1/2πi) ∮_{|τ|=ε} iν f(τ)/(2τ) dτ = (iν/2)·mean f` by the trapezoid rule.
fn inner_winding(sol: &CanonicalSolution, eps: f64) -> Complex64 {
    let n = 64;
    let mean: Complex64 = (0..n)
        .map(|k| {
            let tau = Complex64::from_polar(eps, TAU * k as f64 / n as f64);
            sol.chart_series(tau, sol.truncation_order)
        })
        .sum::<Complex64>()
        / n as f64;
    Complex64::new(0.0, sol.effective_params().nu / 2.0) * mean
}

/// One branch of the star condition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchOutcome {
    pub which: Which,
    /// Poles of ψ₁ (branch 1) or zeros of ψ₂ (branch 2) in the unit disk.
    pub count: Option<i64>,
    /// `max |ψ₁|` (branch 1) or `min |ψ₂|` (branch 2) on the unit circle.
    pub modulus_bound: Option<f64>,
    pub seed_radius: Option<f64>,
    pub closure: Option<f64>,
    pub ray_mismatch: Option<f64>,
    pub holds: bool,
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionStar {
    pub holds: bool,
    /// First branch that holds.
    pub branch: Option<u8>,
    pub psi1: BranchOutcome,
    pub psi2: BranchOutcome,
    /// `a − 2·#poles(ψ₁)` or `a + 2·#zeros(ψ₂)` for the holding branch.
    pub implied_rho: Option<f64>,
}

fn evaluate_branch(params: &Params, which: Which, cfg: &IntegratorConfig) -> BranchOutcome {
    let mut out = BranchOutcome {
        which,
        count: None,
        modulus_bound: None,
        seed_radius: None,
        closure: None,
        ray_mismatch: None,
        holds: false,
        failure: None,
    };
    let run = |out: &mut BranchOutcome| -> Result<()> {
        let series = canonical_series(params, which, DEFAULT_ORDER)?;
        out.seed_radius = series.seed_radius;
        let sol = continue_canonical(&series, params, cfg)?;
        out.closure = sol.closure;
        out.ray_mismatch = sol.ray_mismatch;
        let bound = match which {
            Which::One => sol.max_modulus(),
            Which::Two => sol.min_modulus(),
        };
        out.modulus_bound = Some(bound);
        let count = count_poles_unit_disk(&sol, params, cfg)?;
        out.count = Some(count.count);
        let side_ok = match which {
            Which::One => bound <= 1.0 + MODULUS_SLACK,
            Which::Two => bound >= 1.0 - MODULUS_SLACK,
        };
        out.holds = count.count == 0 && side_ok;
        Ok(())
    };
    if let Err(e) = run(&mut out) {
        out.failure = Some(e.to_string());
        out.holds = false;
    }
    out
}

/// Evaluate both branches of the star condition at `params`.
pub fn condition_star(params: &Params, cfg: &IntegratorConfig) -> Result<ConditionStar> {
    params.validate()?;
    if params.s == 0.0 {
        return Err(Error::RecurrenceSingular);
    }
    let (psi1, psi2) = rayon::join(
        || evaluate_branch(params, Which::One, cfg),
        || evaluate_branch(params, Which::Two, cfg),
    );
    let branch = if psi1.holds {
        Some(1)
    } else if psi2.holds {
        Some(2)
    } else {
        None
    };
    let implied_rho = match branch {
        Some(1) => psi1.count.map(|n| params.a - 2.0 * n as f64),
        Some(2) => psi2.count.map(|n| params.a + 2.0 * n as f64),
        _ => None,
    };
    Ok(ConditionStar {
        holds: branch.is_some(),
        branch,
        psi1,
        psi2,
        implied_rho,
    })
}
