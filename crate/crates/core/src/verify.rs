//! The acceptance checks, shared by the `acceptance` test target and the
//! CLI `verify` command.
//!
//! Each check returns a [`Check`] record. Criterion 13 explores the star condition
//! at ν = 2 and only asserts that the exploration ran to completion.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};
use std::sync::OnceLock;

use crate::bessel::bessel_j;
use crate::canonical::{canonical_series, condition_star, Which, DEFAULT_ORDER};
use crate::error::Result;
use crate::linear::{mobius_apply, monodromy, ProjPoint};
use crate::ode::IntegratorConfig;
use crate::tongue::{find_adjacencies, locking_witness, tongue_slice, Adjacency, IDENTITY_TOL};
use crate::torus::{period_map, rotation_number, Params, RotationResult};

pub const CRITERIA: [(u8, &str); 14] = [
    (1, "zero-axis locking"),
    (2, "autonomous closed form"),
    (3, "queer adjacency on the axis"),
    (4, "rotation bound a-1 <= rho <= a+1"),
    (5, "monotonicity and symmetry"),
    (6, "integer adjacency abscissas"),
    (7, "monodromy identity at adjacencies"),
    (8, "determinant identity"),
    (9, "projectivization correspondence"),
    (10, "closed-form monodromy at a = s = 0"),
    (11, "Bessel boundary asymptotics"),
    (12, "pole-count formula"),
    (13, "star condition exploration at nu = 2"),
    (14, "canonical series sanity"),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub id: u8,
    pub name: String,
    pub passed: bool,
    /// False for record-only checks, which never fail the suite.
    pub asserted: bool,
    /// Worst value of the checked statistic.
    pub measured: f64,
    pub tolerance: f64,
    pub notes: Vec<String>,
}

impl Check {
    fn new(id: u8) -> Self {
        let name = CRITERIA
            .iter()
            .find(|(i, _)| *i == id)
            .map(|(_, n)| n.to_string())
            .unwrap_or_default();
        Self {
            id,
            name,
            passed: false,
            asserted: true,
            measured: f64::NAN,
            tolerance: f64::NAN,
            notes: Vec::new(),
        }
    }

    fn failed(id: u8, reason: impl Into<String>) -> Self {
        let mut c = Self::new(id);
        c.notes.push(reason.into());
        c
    }

    fn settle(mut self, measured: f64, tolerance: f64, passed: bool) -> Self {
        self.measured = measured;
        self.tolerance = tolerance;
        self.passed = passed;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    /// Used for real-flow computations.
    pub cfg: IntegratorConfig,
    /// Used for monodromy, adjacency location and canonical solutions.
    pub fine: IntegratorConfig,
    pub max_periods: usize,
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            cfg: IntegratorConfig::default(),
            fine: IntegratorConfig::with_tolerance(1e-12),
            max_periods: 1 << 16,
            seed: 20_240_611,
        }
    }
}

/// Grid `a ∈ [−3, 3]` (step 0.1) × `s ∈ [0, 10]` (step 0.25) of rotation numbers.
#[derive(Debug, Clone)]
struct Grid {
    a: Vec<f64>,
    s: Vec<f64>,
    /// `rho[j][i]` at `(a[i], s[j])`.
    rho: Vec<Vec<f64>>,
}

/// Runs the checks, caching intermediate results that several share.
pub struct Suite {
    opts: VerifyOptions,
    grid: OnceLock<std::result::Result<Grid, String>>,
    adjacencies: OnceLock<std::result::Result<Vec<Adjacency>, String>>,
}

impl Suite {
    pub fn new(opts: VerifyOptions) -> Self {
        Self {
            opts,
            grid: OnceLock::new(),
            adjacencies: OnceLock::new(),
        }
    }

    pub fn run_all(&self) -> Vec<Check> {
        CRITERIA.iter().map(|(id, _)| self.run(*id)).collect()
    }

    pub fn run(&self, id: u8) -> Check {
        match id {
            1 => self.zero_axis(),
            2 => self.autonomous(),
            3 => self.queer(),
            4 => self.rotation_bound(),
            5 => self.monotone_symmetric(),
            6 => self.integer_abscissas(),
            7 => self.monodromy_identity(),
            8 => self.determinant(),
            9 => self.projectivization(),
            10 => self.closed_form(),
            11 => self.bessel_asymptotics(),
            12 => self.pole_count(),
            13 => self.hypothesis_exploration(),
            14 => self.series_sanity(),
            other => Check::failed(other, format!("unknown criterion {other}")),
        }
    }

    fn rho(&self, nu: f64, a: f64, s: f64) -> Result<RotationResult> {
        rotation_number(
            &Params::new(nu, a, s)?,
            &self.opts.cfg,
            self.opts.max_periods,
        )
    }

    fn zero_axis(&self) -> Check {
        let mut check = Check::new(1);
        let mut worst = 0.0f64;
        let mut ok = true;
        for s in [0.5, 1.0, 2.5, 5.0, 10.0] {
            let res = match self.rho(1.0, 0.0, s) {
                Ok(r) => r,
                Err(e) => return Check::failed(1, e.to_string()),
            };
            let witness =
                match locking_witness(&Params { nu: 1.0, a: 0.0, s }, 0, 64, &self.opts.cfg) {
                    Ok(w) => w,
                    Err(e) => return Check::failed(1, e.to_string()),
                };
            ok &= res.rho == 0.0 && res.locked_at == Some(0) && witness.locked();
            worst = worst.max(res.residual);
            check.notes.push(format!(
                "s={s}: rho={} locked_at={:?} residual={:e} min_dev={:e} max_dev={:e}",
                res.rho, res.locked_at, res.residual, witness.min_dev, witness.max_dev
            ));
        }
        check.settle(worst, 1e-9, ok && worst < 1e-9)
    }

    fn autonomous(&self) -> Check {
        let mut check = Check::new(2);
        let mut worst = 0.0f64;
        for a in [1.5, 2.0, 3.0, 5.0] {
            let res = match self.rho(1.0, a, 0.0) {
                Ok(r) => r,
                Err(e) => return Check::failed(2, e.to_string()),
            };
            let oracle = TAU / period_integral(1.0, a);
            let closed = (a * a - 1.0f64).sqrt();
            let err = (res.rho - oracle).abs().max((res.rho - closed).abs());
            worst = worst.max(err);
            check.notes.push(format!(
                "a={a}: rho={} quadrature={oracle} closed={closed}",
                res.rho
            ));
        }
        check.settle(worst, 1e-6, worst < 1e-6)
    }

    fn queer(&self) -> Check {
        let mut check = Check::new(3);
        match tongue_slice(1, 0.0, 1.0, 1e-10, &self.opts.cfg) {
            Ok(out) => match out.slice() {
                Some(t) => {
                    let err = (t.g_minus - 2f64.sqrt())
                        .abs()
                        .max((t.g_plus - 2f64.sqrt()).abs());
                    check.notes.push(format!(
                        "g-={} g+={} width={:e}",
                        t.g_minus, t.g_plus, t.width
                    ));
                    let m = err.max(t.width);
                    check.settle(m, 1e-6, m < 1e-6)
                }
                None => Check::failed(3, "empty slice"),
            },
            Err(e) => Check::failed(3, e.to_string()),
        }
    }

    fn grid(&self) -> std::result::Result<&Grid, String> {
        self.grid
            .get_or_init(|| {
                let a: Vec<f64> = (0..61).map(|i| -3.0 + 0.1 * i as f64).collect();
                let s: Vec<f64> = (0..41).map(|j| 0.25 * j as f64).collect();
                let rho = s
                    .par_iter()
                    .map(|&sv| {
                        a.par_iter()
                            .map(|&av| self.rho(1.0, av, sv).map(|r| r.rho))
                            .collect::<Result<Vec<f64>>>()
                    })
                    .collect::<Result<Vec<_>>>()
                    .map_err(|e| e.to_string())?;
                Ok(Grid { a, s, rho })
            })
            .as_ref()
            .map_err(Clone::clone)
    }

    fn rotation_bound(&self) -> Check {
        let mut check = Check::new(4);
        let grid = match self.grid() {
            Ok(g) => g,
            Err(e) => return Check::failed(4, e),
        };
        let mut worst = f64::NEG_INFINITY;
        let mut strict_gap = f64::INFINITY;
        for (j, &s) in grid.s.iter().enumerate() {
            for (i, &a) in grid.a.iter().enumerate() {
                let rho = grid.rho[j][i];
                worst = worst.max(rho - (a + 1.0)).max((a - 1.0) - rho);
                let near_corner = ((a.abs() - 1.0).powi(2) + s * s).sqrt() < 0.3;
                if !near_corner {
                    strict_gap = strict_gap.min((a + 1.0 - rho).min(rho - a + 1.0));
                }
            }
        }
        check.notes.push(format!(
            "largest violation {worst:e}; smallest gap away from (±1, 0): {strict_gap:e}"
        ));
        check.settle(worst, 1e-8, worst <= 1e-8 && strict_gap > 1e-8)
    }

    fn monotone_symmetric(&self) -> Check {
        let mut check = Check::new(5);
        let grid = match self.grid() {
            Ok(g) => g,
            Err(e) => return Check::failed(5, e),
        };
        let mut drop = 0.0f64;
        for row in &grid.rho {
            for w in row.windows(2) {
                drop = drop.max(w[0] - w[1]);
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.opts.seed);
        let sample: Vec<(f64, f64)> = (0..100)
            .map(|_| (rng.gen_range(-3.0..3.0), rng.gen_range(0.0..10.0)))
            .collect();
        let sym: Result<Vec<(f64, f64)>> = sample
            .par_iter()
            .map(|&(a, s)| {
                let base = self.rho(1.0, a, s)?.rho;
                let flip_s = self.rho(1.0, a, -s)?.rho;
                let flip_a = self.rho(1.0, -a, s)?.rho;
                Ok(((base - flip_s).abs(), (base + flip_a).abs()))
            })
            .collect();
        let sym = match sym {
            Ok(v) => v,
            Err(e) => return Check::failed(5, e.to_string()),
        };
        let s_err = sym.iter().map(|p| p.0).fold(0.0, f64::max);
        let a_err = sym.iter().map(|p| p.1).fold(0.0, f64::max);
        check.notes.push(format!(
            "largest decrease along a row {drop:e}; |rho(a,s)-rho(a,-s)| <= {s_err:e}; |rho(-a,s)+rho(a,s)| <= {a_err:e}"
        ));
        let m = s_err.max(a_err);
        check.settle(m, 1e-7, drop <= 0.0 && m < 1e-7)
    }

    fn adjacencies(&self) -> std::result::Result<&Vec<Adjacency>, String> {
        self.adjacencies
            .get_or_init(|| {
                let mut out = Vec::new();
                for r in 0..=2 {
                    let scan = find_adjacencies(r, 1.0, (0.0, 12.0), IDENTITY_TOL, &self.opts.fine)
                        .map_err(|e| e.to_string())?;
                    if scan.found.len() < 2 {
                        return Err(format!(
                            "r={r}: found {} adjacencies, failures {:?}",
                            scan.found.len(),
                            scan.failures
                        ));
                    }
                    out.extend(scan.found.into_iter().take(2));
                }
                Ok(out)
            })
            .as_ref()
            .map_err(Clone::clone)
    }

    fn integer_abscissas(&self) -> Check {
        let mut check = Check::new(6);
        let adj = match self.adjacencies() {
            Ok(a) => a,
            Err(e) => return Check::failed(6, e),
        };
        let mut worst = 0.0f64;
        let mut ok = true;
        for x in adj {
            let dev = (x.a - x.r as f64).abs();
            worst = worst.max(dev);
            ok &= x.identity_residual < IDENTITY_TOL && x.invariants_hold(1e-6);
            check.notes.push(format!(
                "r={} a={} s={} identity_residual={:e}",
                x.r, x.a, x.s, x.identity_residual
            ));
        }
        check.settle(worst, 1e-6, ok && worst < 1e-6)
    }

    fn monodromy_identity(&self) -> Check {
        let mut check = Check::new(7);
        let adj = match self.adjacencies() {
            Ok(a) => a,
            Err(e) => return Check::failed(7, e),
        };
        let mut worst = 0.0f64;
        for x in adj {
            match monodromy(&x.params(1.0), &self.opts.fine) {
                Ok(m) => {
                    let d = m.distance_to_identity();
                    worst = worst.max(d);
                    check.notes.push(format!(
                        "r={} s={}: |M - I| = {d:e}, projective deviation {:e}",
                        x.r, x.s, m.projective_deviation
                    ));
                }
                Err(e) => return Check::failed(7, e.to_string()),
            }
        }
        check.settle(worst, 1e-5, worst < 1e-5)
    }

    fn determinant(&self) -> Check {
        let check = Check::new(8);
        let mut rng = ChaCha8Rng::seed_from_u64(self.opts.seed ^ 0x8);
        let sample: Vec<(f64, f64)> = (0..50)
            .map(|_| (rng.gen_range(-3.0..3.0), rng.gen_range(0.0..10.0)))
            .collect();
        let devs: Result<Vec<f64>> = sample
            .par_iter()
            .map(|&(a, s)| {
                Ok(monodromy(&Params::new(1.0, a, s)?, &self.opts.fine)?.det_deviation(a))
            })
            .collect();
        match devs {
            Ok(d) => {
                let worst = d.into_iter().fold(0.0, f64::max);
                check.settle(worst, 1e-8, worst < 1e-8)
            }
            Err(e) => Check::failed(8, e.to_string()),
        }
    }

    fn projectivization(&self) -> Check {
        let mut check = Check::new(9);
        let mut rng = ChaCha8Rng::seed_from_u64(self.opts.seed ^ 0x9);
        let sample: Vec<(f64, f64)> = (0..10)
            .map(|_| (rng.gen_range(-3.0..3.0), rng.gen_range(0.0..10.0)))
            .collect();
        let per_point: Result<Vec<(f64, f64)>> = sample
            .par_iter()
            .map(|&(a, s)| {
                let params = Params::new(1.0, a, s)?;
                let m = monodromy(&params, &self.opts.fine)?;
                let mut arg_err = 0.0f64;
                let mut mod_err = 0.0f64;
                for k in 0..32 {
                    let x = TAU * k as f64 / 32.0;
                    let h = period_map(&params, x, &self.opts.fine)?;
                    let image =
                        mobius_apply(&m.matrix, ProjPoint::Finite(Complex64::from_polar(1.0, x)));
                    let Some(p) = image.finite() else {
                        return Ok((f64::INFINITY, f64::INFINITY));
                    };
                    mod_err = mod_err.max((p.norm() - 1.0).abs());
                    let diff = (p.arg() - h).rem_euclid(TAU);
                    arg_err = arg_err.max(diff.min(TAU - diff));
                }
                Ok((arg_err, mod_err))
            })
            .collect();
        match per_point {
            Ok(v) => {
                let arg = v.iter().map(|p| p.0).fold(0.0, f64::max);
                let modulus = v.iter().map(|p| p.1).fold(0.0, f64::max);
                check.notes.push(format!(
                    "max angle error {arg:e}; max | |p| - 1 | {modulus:e}"
                ));
                check.settle(arg, 1e-6, arg < 1e-6 && modulus < 1e-8)
            }
            Err(e) => Check::failed(9, e.to_string()),
        }
    }

    fn closed_form(&self) -> Check {
        let check = Check::new(10);
        match monodromy(
            &Params {
                nu: 1.0,
                a: 0.0,
                s: 0.0,
            },
            &self.opts.fine,
        ) {
            Ok(m) => {
                let (ch, sh) = (PI.cosh(), PI.sinh());
                let c = |x: f64| Complex64::new(x, 0.0);
                let expected = [[c(ch), c(-sh)], [c(-sh), c(ch)]];
                let d = crate::linear::inf_norm_diff(&m.matrix, &expected);
                check.settle(d, 1e-7, d < 1e-7)
            }
            Err(e) => Check::failed(10, e.to_string()),
        }
    }

    fn bessel_asymptotics(&self) -> Check {
        let mut check = Check::new(11);
        let cases: Vec<(i64, f64)> = [0, 1]
            .iter()
            .flat_map(|&r| [15.0, 20.0, 25.0].map(move |s| (r, s)))
            .collect();
        let slices: Result<Vec<_>> = cases
            .par_iter()
            .map(|&(r, s)| tongue_slice(r, s, 1.0, 1e-8, &self.opts.cfg))
            .collect();
        let slices = match slices {
            Ok(v) => v,
            Err(e) => return Check::failed(11, e.to_string()),
        };
        let mut worst_ratio = 0.0f64;
        for (&(r, s), out) in cases.iter().zip(&slices) {
            let Some(t) = out.slice() else {
                return Check::failed(11, format!("empty slice r={r} s={s}"));
            };
            let j = bessel_j(r as i32, -s).abs();
            let bound = 1.5 / s.sqrt();
            let e_minus = (t.g_minus - (r as f64 - j)).abs();
            let e_plus = (t.g_plus - (r as f64 + j)).abs();
            worst_ratio = worst_ratio.max(e_minus.max(e_plus) / bound);
            check.notes.push(format!(
                "r={r} s={s}: g-={} g+={} |J|={j} errors {e_minus:e}, {e_plus:e} (bound {bound:e})",
                t.g_minus, t.g_plus
            ));
        }
        check.settle(worst_ratio, 1.0, worst_ratio < 1.0)
    }

    fn pole_count(&self) -> Check {
        let mut check = Check::new(12);
        let adj = match self.adjacencies() {
            Ok(a) => a,
            Err(e) => return Check::failed(12, e),
        };
        let outcomes: Result<Vec<_>> = adj
            .par_iter()
            .map(|x| condition_star(&x.params(1.0), &self.opts.fine))
            .collect();
        let outcomes = match outcomes {
            Ok(v) => v,
            Err(e) => return Check::failed(12, e.to_string()),
        };
        let mut worst = 0.0f64;
        let mut ok = true;
        for (x, cs) in adj.iter().zip(&outcomes) {
            let count = match cs.branch {
                Some(1) => cs.psi1.count,
                Some(2) => cs.psi2.count,
                _ => None,
            };
            let rho_err = cs
                .implied_rho
                .map(|rho| (rho - x.r as f64).abs())
                .unwrap_or(f64::INFINITY);
            worst = worst.max(rho_err);
            ok &= cs.holds && count == Some(0) && x.even_gap();
            check.notes.push(format!(
                "r={} s={}: branch {:?}, count {:?}, max|psi1| {:?}, min|psi2| {:?}, implied rho {:?}",
                x.r, x.s, cs.branch, count, cs.psi1.modulus_bound, cs.psi2.modulus_bound, cs.implied_rho
            ));
        }
        check.settle(worst, 1e-6, ok && worst < 1e-6)
    }

    fn hypothesis_exploration(&self) -> Check {
        let mut check = Check::new(13);
        check.asserted = false;
        let mut complete = true;
        for r in 0..=1 {
            match find_adjacencies(r, 2.0, (0.0, 8.0), IDENTITY_TOL, &self.opts.fine) {
                Ok(scan) => match scan.found.first() {
                    Some(x) => match condition_star(&x.params(2.0), &self.opts.fine) {
                        Ok(cs) => check.notes.push(format!(
                            "nu=2 r={r} a={} s={}: holds={} branch={:?} psi1(count {:?}, max|psi1| {:?}, failure {:?}) psi2(count {:?}, min|psi2| {:?}, failure {:?})",
                            x.a, x.s, cs.holds, cs.branch,
                            cs.psi1.count, cs.psi1.modulus_bound, cs.psi1.failure,
                            cs.psi2.count, cs.psi2.modulus_bound, cs.psi2.failure
                        )),
                        Err(e) => {
                            complete = false;
                            check.notes.push(format!("nu=2 r={r}: star condition failed: {e}"));
                        }
                    },
                    None => {
                        complete = false;
                        check.notes.push(format!("nu=2 r={r}: no adjacency in (0, 8)"));
                    }
                },
                Err(e) => {
                    complete = false;
                    check.notes.push(format!("nu=2 r={r}: scan failed: {e}"));
                }
            }
        }
        let missing = if complete { 0.0 } else { 1.0 };
        check.settle(missing, 0.5, complete)
    }

    fn series_sanity(&self) -> Check {
        let mut check = Check::new(14);
        let adj = match self.adjacencies() {
            Ok(a) => a,
            Err(e) => return Check::failed(14, e),
        };
        let mut worst = 0.0f64;
        let mut ok = true;
        for x in adj {
            for which in [Which::One, Which::Two] {
                let p = x.params(1.0);
                let sol = match canonical_series(&p, which, DEFAULT_ORDER) {
                    Ok(s) => s,
                    Err(e) => return Check::failed(14, e.to_string()),
                };
                let eff = sol.effective_params();
                ok &= sol.series_coefficients[1] == Complex64::new(-eff.nu / eff.s, 0.0);
                ok &= sol.series_coefficients[0] == Complex64::new(0.0, 0.0);
                let eps = sol.seed_radius.unwrap_or(0.0);
                ok &= eps >= 0.01;
                worst = worst.max(sol.seed_agreement);
                check.notes.push(format!(
                    "r={} s={} psi{}: seed radius {eps}, agreement {:e}",
                    x.r,
                    x.s,
                    which.index(),
                    sol.seed_agreement
                ));
            }
        }
        check.settle(worst, 1e-8, ok && worst < 1e-8)
    }
}

/// `∫₀^{2π} dx / (ν sin x + a)` for `|a| > |ν|` by the trapezoid rule, which
/// converges geometrically for periodic analytic integrands.
pub fn period_integral(nu: f64, a: f64) -> f64 {
    let mut prev = f64::NAN;
    let mut n = 64;
    loop {
        let h = TAU / n as f64;
        let sum: f64 = (0..n).map(|k| 1.0 / (nu * (h * k as f64).sin() + a)).sum();
        let val = sum * h;
        if (val - prev).abs() < 1e-14 * val.abs() || n > 1 << 20 {
            return val;
        }
        prev = val;
        n *= 2;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn period_integral_matches_closed_form() {
        for a in [1.1, 2.0, 7.0] {
            let t = period_integral(1.0, a);
            assert!((t - TAU / (a * a - 1.0f64).sqrt()).abs() < 1e-10);
        }
    }

    #[test]
    fn criteria_are_numbered_consecutively() {
        for (k, (id, _)) in CRITERIA.iter().enumerate() {
            assert_eq!(*id as usize, k + 1);
        }
        assert!(!Suite::new(VerifyOptions::default()).run(99).passed);
    }
}
