//! Phase locking, tongue boundaries `g±ᵣ(s)` and adjacency points.
//!
//! For fixed `(ν, s)` the displacement `H(x) − x` of the lifted period map
//! increases strictly with `a`, so the tongue of rotation number `r` is the
//! interval where `min (H(x) − x) ≤ 2πr ≤ max (H(x) − x)`. Its left end is
//! the root of the max-deviation and its right end the root of the
//! min-deviation, both monotone in `a`.
//!
//! Every displacement lies between `2π(a − |ν|)` and `2π(a + |ν|)`, so the
//! `r`-tongue is contained in `[r − |ν|, r + |ν|]`; this gives a bracket that
//! is always valid.
//!
//! The equation is invariant under `(x, t) ↦ (π − x, π − t)`. For the period
//! map based at `t = π/2` this forces parabolic fixed points onto
//! `x = ±π/2`, so the two analytic boundary curves are the zero sets of
//! `H(±π/2) ∓ π/2 − 2πr` (based at `π/2`). Adjacencies are their crossings,
//! which turns adjacency location into a regular two-equation root problem.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, TAU};

use crate::bessel::bessel_j;
use crate::error::{Error, Result};
use crate::ode::IntegratorConfig;
use crate::roots::brent_root;
use crate::torus::{is_identity_map, period_map_from, LiftMap, Params, DEFAULT_LIFT_SAMPLES};

/// Default absolute tolerance on boundary abscissas.
pub const BOUNDARY_TOL: f64 = 1e-8;
/// Default identity-map residual accepted for an adjacency.
pub const IDENTITY_TOL: f64 = 1e-6;
/// s-step of the coarse adjacency scan.
pub const ADJACENCY_SCAN_STEP: f64 = 0.05;

/// Extremes of `H(x) − x − 2πr` over a period.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LockingWitness {
    pub r: i64,
    pub min_dev: f64,
    pub max_dev: f64,
}

impl LockingWitness {
    /// The period map has a fixed point with rotation index `r`.
    pub fn locked(&self) -> bool {
        self.min_dev <= 0.0 && 0.0 <= self.max_dev
    }
}

pub fn locking_witness(
    params: &Params,
    r: i64,
    n_samples: usize,
    cfg: &IntegratorConfig,
) -> Result<LockingWitness> {
    if n_samples < 16 {
        return Err(Error::InvalidArgument(format!(
            "locking witness needs at least 16 samples, got {n_samples}"
        )));
    }
    let lift = LiftMap::build(params, n_samples, cfg)?;
    let (dmin, dmax) = lift.refined_extrema()?;
    let shift = TAU * r as f64;
    Ok(LockingWitness {
        r,
        min_dev: dmin - shift,
        max_dev: dmax - shift,
    })
}

/// Horizontal cross-section of the `r`-tongue at ordinate `s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TongueSlice {
    pub r: i64,
    pub s: f64,
    pub g_minus: f64,
    pub g_plus: f64,
    pub width: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SliceOutcome {
    Slice(TongueSlice),
    /// The supplied bracket does not meet the tongue.
    Empty {
        r: i64,
        s: f64,
    },
}

impl SliceOutcome {
    pub fn slice(&self) -> Option<&TongueSlice> {
        match self {
            SliceOutcome::Slice(t) => Some(t),
            SliceOutcome::Empty { .. } => None,
        }
    }

    pub fn s(&self) -> f64 {
        match self {
            SliceOutcome::Slice(t) => t.s,
            SliceOutcome::Empty { s, .. } => *s,
        }
    }
}

/// Bracket `[r − |ν| − δ, r + |ν| + δ]` that always contains the `r`-tongue.
pub fn universal_bracket(r: i64, nu: f64) -> (f64, f64) {
    let half = nu.abs() + 0.05;
    (r as f64 - half, r as f64 + half)
}

/// Bracket seeded from the Bessel asymptotics `r ± ν J_r(−s/ν)` for `|s| > 5`,
/// the universal bracket otherwise.
pub fn seed_bracket(r: i64, s: f64, nu: f64) -> (f64, f64) {
    let (ulo, uhi) = universal_bracket(r, nu);
    if s.abs() <= 5.0 {
        return (ulo, uhi);
    }
    let half = (nu * bessel_j(r as i32, -s / nu)).abs();
    let margin = 0.25 * nu.abs() + 2.0 * nu.abs() / s.abs().sqrt();
    let lo = (r as f64 - half - margin).max(ulo);
    let hi = (r as f64 + half + margin).min(uhi);
    (lo, hi)
}

fn deviation_extremes(
    nu: f64,
    s: f64,
    a: f64,
    r: i64,
    cfg: &IntegratorConfig,
) -> Result<LockingWitness> {
    locking_witness(&Params::new(nu, a, s)?, r, DEFAULT_LIFT_SAMPLES, cfg)
}

/// Left and right tongue boundaries at ordinate `s` by root finding on the
/// monotone deviation extremes, starting from `bracket = (a_lo, a_hi)` with
/// `a_lo` below the tongue and `a_hi` inside or above it.
pub fn boundary_at(
    r: i64,
    s: f64,
    nu: f64,
    bracket: (f64, f64),
    tol_a: f64,
    cfg: &IntegratorConfig,
) -> Result<SliceOutcome> {
    Params::new(nu, 0.0, s)?;
    let (a_lo, mut a_hi) = bracket;
    if a_lo.is_nan() || a_hi.is_nan() || a_lo >= a_hi || tol_a <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "bad bracket ({a_lo}, {a_hi}) or tolerance {tol_a}"
        )));
    }
    let max_dev = |a: f64| deviation_extremes(nu, s, a, r, cfg).map(|w| w.max_dev);
    let min_dev = |a: f64| deviation_extremes(nu, s, a, r, cfg).map(|w| w.min_dev);

    let lo_w = deviation_extremes(nu, s, a_lo, r, cfg)?;
    let hi_w = deviation_extremes(nu, s, a_hi, r, cfg)?;
    if lo_w.max_dev >= 0.0 || hi_w.max_dev < 0.0 {
        return Ok(SliceOutcome::Empty { r, s });
    }
    let g_minus = brent_root(max_dev, a_lo, a_hi, tol_a, 200)?;

    let mut upper = hi_w.min_dev;
    let step = nu.abs().max(0.5);
    let mut lower_end = g_minus;
    let mut expansions = 0;
    while upper <= 0.0 {
        lower_end = a_hi;
        a_hi += step;
        upper = min_dev(a_hi)?;
        expansions += 1;
        if expansions > 64 {
            return Err(Error::BracketInvalid {
                lo: g_minus,
                hi: a_hi,
            });
        }
    }
    // at a parabolic point both extremes vanish together
    let g_plus = if lower_end == g_minus && min_dev(g_minus)? >= 0.0 {
        g_minus
    } else {
        brent_root(min_dev, lower_end, a_hi, tol_a, 200)?.max(g_minus)
    };
    Ok(SliceOutcome::Slice(TongueSlice {
        r,
        s,
        g_minus,
        g_plus,
        width: g_plus - g_minus,
    }))
}

/// [`boundary_at`] with the default seeded bracket.
pub fn tongue_slice(
    r: i64,
    s: f64,
    nu: f64,
    tol_a: f64,
    cfg: &IntegratorConfig,
) -> Result<SliceOutcome> {
    let seeded = seed_bracket(r, s, nu);
    match boundary_at(r, s, nu, seeded, tol_a, cfg)? {
        SliceOutcome::Empty { .. } => boundary_at(r, s, nu, universal_bracket(r, nu), tol_a, cfg),
        found => Ok(found),
    }
}

/// Tongue slices over `s_grid`, with extra slices inserted around interior
/// local minima of the width.
pub fn width_function(
    r: i64,
    nu: f64,
    s_grid: &[f64],
    tol_a: f64,
    cfg: &IntegratorConfig,
) -> Result<Vec<SliceOutcome>> {
    if s_grid.windows(2).any(|w| w[0].is_nan() || w[0] >= w[1]) {
        return Err(Error::InvalidArgument(
            "s grid must be strictly increasing".into(),
        ));
    }
    let compute = |grid: &[f64]| -> Result<Vec<SliceOutcome>> {
        grid.par_iter()
            .map(|&s| tongue_slice(r, s, nu, tol_a, cfg))
            .collect()
    };
    let mut out = compute(s_grid)?;
    let widths: Vec<Option<f64>> = out.iter().map(|o| o.slice().map(|t| t.width)).collect();
    let mut extra = Vec::new();
    for i in 1..widths.len().saturating_sub(1) {
        if let (Some(w0), Some(w1), Some(w2)) = (widths[i - 1], widths[i], widths[i + 1]) {
            if w1 <= w0 && w1 <= w2 {
                let (s0, s1, s2) = (s_grid[i - 1], s_grid[i], s_grid[i + 1]);
                extra.push(0.5 * (s0 + s1));
                extra.push(0.5 * (s1 + s2));
            }
        }
    }
    out.extend(compute(&extra)?);
    out.sort_by(|x, y| x.s().total_cmp(&y.s()));
    Ok(out)
}

/// Signed deviation `H(x) − x − 2πr` of the period map based at `t = π/2`.
fn symmetric_deviation(params: &Params, x: f64, r: i64, cfg: &IntegratorConfig) -> Result<f64> {
    Ok(period_map_from(params, FRAC_PI_2, x, cfg)? - x - TAU * r as f64)
}

/// Abscissas `(a₊, a₋)` at which `x = +π/2`, resp. `x = −π/2`, is a fixed
/// point of index `r` of the period map based at `t = π/2`. These are the
/// two analytic boundary curves of the `r`-tongue; their minimum and
/// maximum are `g₋` and `g₊`.
pub fn symmetric_boundaries(
    r: i64,
    s: f64,
    nu: f64,
    tol_a: f64,
    cfg: &IntegratorConfig,
) -> Result<(f64, f64)> {
    let base = Params::new(nu, 0.0, s)?;
    let (lo, hi) = universal_bracket(r, nu);
    let plus = brent_root(
        |a| symmetric_deviation(&base.with_a(a), FRAC_PI_2, r, cfg),
        lo,
        hi,
        tol_a,
        200,
    )?;
    let minus = brent_root(
        |a| symmetric_deviation(&base.with_a(a), -FRAC_PI_2, r, cfg),
        lo,
        hi,
        tol_a,
        200,
    )?;
    Ok((plus, minus))
}

/// A located adjacency: a parameter point with `s ≠ 0` where the period map
/// is the identity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Adjacency {
    /// Rotation number of the tongue.
    pub r: i64,
    pub a: f64,
    pub s: f64,
    pub identity_residual: f64,
    /// Distance from `a` to the nearest integer.
    pub abscissa_residual: f64,
}

impl Adjacency {
    pub fn nearest_integer(&self) -> i64 {
        self.a.round() as i64
    }

    pub fn params(&self, nu: f64) -> Params {
        Params {
            nu,
            a: self.a,
            s: self.s,
        }
    }

    /// Integer abscissa within `tol`.
    pub fn integer_abscissa(&self, tol: f64) -> bool {
        self.abscissa_residual < tol
    }

    /// Abscissa has the sign of `r` (or both vanish).
    pub fn sign_matches(&self) -> bool {
        self.nearest_integer().signum() == self.r.signum()
    }

    pub fn abscissa_bounded(&self) -> bool {
        self.nearest_integer().abs() <= self.r.abs()
    }

    /// `r − a` is even.
    pub fn even_gap(&self) -> bool {
        (self.r - self.nearest_integer()).rem_euclid(2) == 0
    }

    pub fn invariants_hold(&self, tol: f64) -> bool {
        self.s != 0.0
            && self.integer_abscissa(tol)
            && self.sign_matches()
            && self.abscissa_bounded()
            && self.even_gap()
    }
}

/// A scan candidate that could not be confirmed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateFailure {
    pub s_guess: f64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdjacencyScan {
    pub found: Vec<Adjacency>,
    pub failures: Vec<CandidateFailure>,
}

/// Damped Newton on the two symmetric-point deviations with a
/// finite-difference Jacobian; steps capped at 0.1 per parameter.
pub fn refine_adjacency(
    r: i64,
    nu: f64,
    guess: (f64, f64),
    cfg: &IntegratorConfig,
) -> Result<(f64, f64)> {
    let g = |a: f64, s: f64| -> Result<[f64; 2]> {
        let p = Params::new(nu, a, s)?;
        Ok([
            symmetric_deviation(&p, FRAC_PI_2, r, cfg)?,
            symmetric_deviation(&p, -FRAC_PI_2, r, cfg)?,
        ])
    };
    let (mut a, mut s) = guess;
    let mut val = g(a, s)?;
    let h = 1e-6;
    for _ in 0..60 {
        let norm = val[0].abs().max(val[1].abs());
        if norm < 1e-13 {
            return Ok((a, s));
        }
        let ga = g(a + h, s)?;
        let gs = g(a, s + h)?;
        let j = [
            [(ga[0] - val[0]) / h, (gs[0] - val[0]) / h],
            [(ga[1] - val[1]) / h, (gs[1] - val[1]) / h],
        ];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det.abs() < 1e-14 || !det.is_finite() {
            return Err(Error::RefinementDiverged {
                a,
                s,
                reason: "singular Jacobian".into(),
            });
        }
        let da = -(j[1][1] * val[0] - j[0][1] * val[1]) / det;
        let ds = -(-j[1][0] * val[0] + j[0][0] * val[1]) / det;
        let scale = (da.abs().max(ds.abs()) / 0.1).max(1.0);
        let (da, ds) = (da / scale, ds / scale);
        // backtrack until the residual decreases
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..12 {
            let (na, ns) = (a + lambda * da, s + lambda * ds);
            let nv = g(na, ns)?;
            if nv[0].abs().max(nv[1].abs()) < norm || lambda * da.abs().max(ds.abs()) < 1e-14 {
                a = na;
                s = ns;
                val = nv;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if !accepted {
            return Err(Error::RefinementDiverged {
                a,
                s,
                reason: "no descent along the Newton direction".into(),
            });
        }
        if (lambda * da).abs() < 1e-15 && (lambda * ds).abs() < 1e-15 {
            break;
        }
    }
    let norm = val[0].abs().max(val[1].abs());
    if norm < 1e-9 {
        Ok((a, s))
    } else {
        Err(Error::RefinementDiverged {
            a,
            s,
            reason: format!("residual {norm:e} after iteration limit"),
        })
    }
}

/// `(s guess, a guess, bracket in s for the gap)`.
type Candidate = (f64, f64, Option<(f64, f64)>);

/// Locate adjacencies of the `r`-tongue with `s` in `s_range` (the axis
/// `s = 0` is never reported). Candidates come from sign changes and small
/// local minima of the signed gap between the two boundary curves, are
/// refined by [`refine_adjacency`] and confirmed by [`is_identity_map`] with
/// tolerance `tol`.
pub fn find_adjacencies(
    r: i64,
    nu: f64,
    s_range: (f64, f64),
    tol: f64,
    cfg: &IntegratorConfig,
) -> Result<AdjacencyScan> {
    Params::new(nu, 0.0, 1.0)?;
    let (s_lo, s_hi) = s_range;
    if !s_lo.is_finite() || !s_hi.is_finite() || s_lo >= s_hi {
        return Err(Error::InvalidArgument(format!(
            "bad s range ({s_lo}, {s_hi})"
        )));
    }
    let n = ((s_hi - s_lo) / ADJACENCY_SCAN_STEP).ceil().max(8.0) as usize;
    let grid: Vec<f64> = (0..=n)
        .map(|k| s_lo + (s_hi - s_lo) * k as f64 / n as f64)
        .filter(|s| s.abs() > 1e-9)
        .collect();
    let gaps: Vec<(f64, f64, f64)> = grid
        .par_iter()
        .map(|&s| {
            let (ap, am) = symmetric_boundaries(r, s, nu, 1e-12, cfg)?;
            Ok((s, ap - am, 0.5 * (ap + am)))
        })
        .collect::<Result<_>>()?;

    let mut candidates: Vec<Candidate> = Vec::new();
    for i in 0..gaps.len().saturating_sub(1) {
        let (s0, d0, m0) = gaps[i];
        let (s1, d1, m1) = gaps[i + 1];
        // never bracket across the axis s = 0
        if s0 * s1 <= 0.0 {
            continue;
        }
        if d0 == 0.0 || d0.signum() != d1.signum() {
            let t = if d0 == d1 { 0.5 } else { d0 / (d0 - d1) };
            candidates.push((s0 + t * (s1 - s0), m0 + t * (m1 - m0), Some((s0, s1))));
        }
    }
    for i in 1..gaps.len().saturating_sub(1) {
        let (d0, d1, d2) = (gaps[i - 1].1.abs(), gaps[i].1.abs(), gaps[i + 1].1.abs());
        let same_sign = gaps[i - 1].1.signum() == gaps[i].1.signum()
            && gaps[i].1.signum() == gaps[i + 1].1.signum();
        if same_sign && d1 < d0 && d1 < d2 && d1 < 0.05 {
            candidates.push((gaps[i].0, gaps[i].2, None));
        }
    }

    let outcomes: Vec<std::result::Result<Adjacency, CandidateFailure>> = candidates
        .par_iter()
        .map(|&(s_guess, a_guess, bracket)| {
            confirm_candidate(r, nu, s_guess, a_guess, bracket, tol, cfg).map_err(|e| {
                CandidateFailure {
                    s_guess,
                    reason: e.to_string(),
                }
            })
        })
        .collect();

    let mut found: Vec<Adjacency> = Vec::new();
    let mut failures = Vec::new();
    for o in outcomes {
        match o {
            Ok(adj) => {
                if !found.iter().any(|f| (f.s - adj.s).abs() < 1e-6) {
                    found.push(adj);
                }
            }
            Err(f) => failures.push(f),
        }
    }
    found.sort_by(|x, y| x.s.total_cmp(&y.s));
    Ok(AdjacencyScan { found, failures })
}

fn confirm_candidate(
    r: i64,
    nu: f64,
    s_guess: f64,
    a_guess: f64,
    bracket: Option<(f64, f64)>,
    tol: f64,
    cfg: &IntegratorConfig,
) -> Result<Adjacency> {
    let (a, s) = match refine_adjacency(r, nu, (a_guess, s_guess), cfg) {
        Ok(point) => point,
        Err(newton_err) => {
            // Fall back to bracketed root finding on the boundary gap.
            let (s0, s1) = bracket.ok_or(newton_err)?;
            let gap = |s: f64| symmetric_boundaries(r, s, nu, 1e-13, cfg).map(|(p, m)| p - m);
            let s = brent_root(gap, s0, s1, 1e-12, 200)?;
            let (p, m) = symmetric_boundaries(r, s, nu, 1e-13, cfg)?;
            (0.5 * (p + m), s)
        }
    };
    if s.abs() < 1e-6 {
        return Err(Error::RefinementDiverged {
            a,
            s,
            reason: "converged to the axis s = 0".into(),
        });
    }
    let params = Params::new(nu, a, s)?;
    let check = is_identity_map(&params, tol, DEFAULT_LIFT_SAMPLES, cfg)?;
    if !check.is_identity || check.r != r {
        return Err(Error::RefinementDiverged {
            a,
            s,
            reason: format!(
                "identity test failed: deviation {:e}, index {}",
                check.max_deviation, check.r
            ),
        });
    }
    Ok(Adjacency {
        r,
        a,
        s,
        identity_residual: check.max_deviation,
        abscissa_residual: (a - a.round()).abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> IntegratorConfig {
        IntegratorConfig::default()
    }

    #[test]
    fn witness_examples() {
        let w = locking_witness(&Params::new(1.0, 0.0, 0.0).unwrap(), 0, 32, &cfg()).unwrap();
        assert!(w.locked());
        let w = locking_witness(&Params::new(1.0, 2.0, 0.0).unwrap(), 0, 32, &cfg()).unwrap();
        assert!(!w.locked());
        let w =
            locking_witness(&Params::new(1.0, 2f64.sqrt(), 0.0).unwrap(), 1, 32, &cfg()).unwrap();
        assert!(w.min_dev.abs() < 1e-8 && w.max_dev.abs() < 1e-8, "{w:?}");
        assert!(locking_witness(&Params::new(1.0, 0.0, 0.0).unwrap(), 0, 8, &cfg()).is_err());
    }

    #[test]
    fn zero_tongue_at_axis_is_unit_interval() {
        let out = boundary_at(0, 0.0, 1.0, (-1.5, 0.0), 1e-9, &cfg()).unwrap();
        let t = out.slice().unwrap();
        assert!((t.g_minus + 1.0).abs() < 1e-7, "{t:?}");
        assert!((t.g_plus - 1.0).abs() < 1e-7, "{t:?}");
    }

    #[test]
    fn empty_bracket_is_reported() {
        let out = boundary_at(0, 1.0, 1.0, (2.0, 3.0), 1e-8, &cfg()).unwrap();
        assert_eq!(out, SliceOutcome::Empty { r: 0, s: 1.0 });
    }

    #[test]
    fn symmetric_points_give_the_same_boundaries() {
        for (r, s) in [(0, 1.0), (1, 3.0), (2, 1.5)] {
            let t = *tongue_slice(r, s, 1.0, 1e-10, &cfg())
                .unwrap()
                .slice()
                .unwrap();
            let (p, m) = symmetric_boundaries(r, s, 1.0, 1e-12, &cfg()).unwrap();
            assert!((t.g_minus - p.min(m)).abs() < 1e-7, "{t:?} vs {p} {m}");
            assert!((t.g_plus - p.max(m)).abs() < 1e-7, "{t:?} vs {p} {m}");
        }
    }

    #[test]
    fn adjacency_invariant_predicates() {
        let adj = Adjacency {
            r: 3,
            a: 1.0 + 1e-9,
            s: 2.0,
            identity_residual: 0.0,
            abscissa_residual: 1e-9,
        };
        assert!(adj.invariants_hold(1e-6));
        let bad = Adjacency { a: 2.0, ..adj };
        assert!(!bad.even_gap());
        let neg = Adjacency { a: -1.0, ..adj };
        assert!(!neg.sign_matches());
    }
}
