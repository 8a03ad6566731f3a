use rayon::prelude::*;

use tongues_core::tongue::{find_adjacencies, tongue_slice, IDENTITY_TOL};
use tongues_core::verify::{Check, Suite, VerifyOptions};
use tongues_core::{
    condition_star, monodromy, rotation_number, IntegratorConfig, Params, SliceOutcome,
};

use crate::report::{
    AdjacencyRow, CheckRow, GridRow, MonodromyRow, Provenance, Report, Results, RotnumRow,
    TongueRow,
};
use crate::{CliError, Command, Global};

/// Slack on the monotonicity of ρ in `a` across a grid row.
const MONOTONE_SLACK: f64 = 1e-8;
/// Abscissa tolerance for the adjacency invariants.
const ABSCISSA_TOL: f64 = 1e-6;

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

fn integrator(global: &Global) -> Result<IntegratorConfig, CliError> {
    let tol = global.tol;
    if !(tol > 0.0 && tol < 1e-2) {
        return Err(CliError::Config(format!(
            "--tol must lie in (0, 1e-2), got {tol}"
        )));
    }
    let cfg = IntegratorConfig {
        rel_tol: tol,
        abs_tol: tol * 1e-2,
        ..IntegratorConfig::default()
    };
    cfg.validate()
        .map_err(|e| CliError::Config(e.to_string()))?;
    Ok(cfg)
}

fn check_global(global: &Global) -> Result<(), CliError> {
    if !global.nu.is_finite() || global.nu == 0.0 {
        return Err(CliError::Config(format!(
            "--nu must be finite and nonzero, got {}",
            global.nu
        )));
    }
    if global.threads == Some(0) {
        return Err(CliError::Config("--threads must be positive".into()));
    }
    Ok(())
}

fn check_finite(name: &str, x: f64) -> Result<(), CliError> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(CliError::Config(format!(
            "--{name} must be finite, got {x}"
        )))
    }
}

fn check_row(c: Check) -> CheckRow {
    CheckRow {
        id: c.id,
        name: c.name,
        passed: c.passed,
        asserted: c.asserted,
        measured: finite(c.measured),
        tolerance: finite(c.tolerance),
        notes: c.notes,
    }
}

/// Canonical echo of the request; excludes output and threading options so
/// that identical computations give identical reports.
fn echo(global: &Global, command: &Command) -> Vec<String> {
    let name = match command {
        Command::Rotnum { .. } => "rotnum",
        Command::Grid { .. } => "grid",
        Command::Tongue { .. } => "tongue",
        Command::Adjacency { .. } => "adjacency",
        Command::Monodromy { .. } => "monodromy",
        Command::Verify { .. } => "verify",
    };
    let mut out = vec![
        name.to_string(),
        format!("--nu={}", global.nu),
        format!("--tol={:e}", global.tol),
    ];
    let push = |out: &mut Vec<String>, k: &str, v: String| out.push(format!("--{k}={v}"));
    match command {
        Command::Rotnum { a, s, max_periods } => {
            push(&mut out, "a", a.to_string());
            push(&mut out, "s", s.to_string());
            push(&mut out, "max-periods", max_periods.to_string());
        }
        Command::Grid {
            a_range,
            s_range,
            max_periods,
        } => {
            push(&mut out, "a-range", a_range.to_string());
            push(&mut out, "s-range", s_range.to_string());
            push(&mut out, "max-periods", max_periods.to_string());
        }
        Command::Tongue {
            r,
            s,
            s_range,
            a_tol,
        } => {
            push(&mut out, "r", r.to_string());
            if let Some(s) = s {
                push(&mut out, "s", s.to_string());
            }
            if let Some(range) = s_range {
                push(&mut out, "s-range", range.to_string());
            }
            push(&mut out, "a-tol", a_tol.to_string());
        }
        Command::Adjacency {
            r,
            s_range,
            no_condition,
        } => {
            push(&mut out, "r", r.to_string());
            push(&mut out, "s-range", s_range.to_string());
            if *no_condition {
                out.push("--no-condition".into());
            }
        }
        Command::Monodromy { a, s } => {
            push(&mut out, "a", a.to_string());
            push(&mut out, "s", s.to_string());
        }
        Command::Verify { criteria } => {
            out.extend(criteria.iter().map(|c| c.to_string()));
        }
    }
    out
}

/// Execute `command`; per-point numerical failures are collected in the
/// report, anything that prevents a report is returned as an error.
pub fn run(global: &Global, command: &Command) -> Result<Report, CliError> {
    check_global(global)?;
    let cfg = integrator(global)?;
    let nu = global.nu;
    let mut checks = Vec::new();
    let mut failures = Vec::new();

    let results = match command {
        Command::Rotnum { a, s, max_periods } => {
            check_finite("a", *a)?;
            check_finite("s", *s)?;
            let params = Params::new(nu, *a, *s)?;
            let res = rotation_number(&params, &cfg, *max_periods)?;
            Results::Rotnum(vec![RotnumRow {
                nu,
                a: *a,
                s: *s,
                rho: res.rho,
                locked_r: res.locked_at,
                iterations: res.iterations,
                residual: finite(res.residual),
                converged: res.converged,
            }])
        }
        Command::Grid {
            a_range,
            s_range,
            max_periods,
        } => {
            let a_pts = a_range.points();
            let s_pts = s_range.points();
            let points: Vec<(f64, f64)> = s_pts
                .iter()
                .flat_map(|&s| a_pts.iter().map(move |&a| (a, s)))
                .collect();
            let computed: Vec<(GridRow, Option<String>)> = points
                .par_iter()
                .map(|&(a, s)| {
                    let res =
                        Params::new(nu, a, s).and_then(|p| rotation_number(&p, &cfg, *max_periods));
                    match res {
                        Ok(r) => (
                            GridRow {
                                a,
                                s,
                                rho: finite(r.rho),
                                locked_r: r.locked_at,
                            },
                            None,
                        ),
                        Err(e) => (
                            GridRow {
                                a,
                                s,
                                rho: None,
                                locked_r: None,
                            },
                            Some(format!("a={a} s={s}: {e}")),
                        ),
                    }
                })
                .collect();
            let mut rows = Vec::with_capacity(computed.len());
            for (row, failure) in computed {
                failures.extend(failure);
                rows.push(row);
            }
            checks.push(monotone_check(&rows, a_pts.len()));
            Results::Grid(rows)
        }
        Command::Tongue {
            r,
            s,
            s_range,
            a_tol,
        } => {
            if a_tol.is_nan() || *a_tol <= 0.0 {
                return Err(CliError::Config(format!(
                    "--a-tol must be positive, got {a_tol}"
                )));
            }
            let s_pts = match (s, s_range) {
                (Some(s), None) => {
                    check_finite("s", *s)?;
                    vec![*s]
                }
                (None, Some(range)) => range.points(),
                _ => {
                    return Err(CliError::Config(
                        "give exactly one of --s and --s-range".into(),
                    ))
                }
            };
            let computed: Vec<Result<SliceOutcome, String>> = s_pts
                .par_iter()
                .map(|&s| tongue_slice(*r, s, nu, *a_tol, &cfg).map_err(|e| format!("s={s}: {e}")))
                .collect();
            let mut rows = Vec::with_capacity(computed.len());
            let mut worst_order = 0.0f64;
            for (outcome, &s) in computed.into_iter().zip(&s_pts) {
                let row = match outcome {
                    Ok(SliceOutcome::Slice(t)) => {
                        worst_order = worst_order.max(t.g_minus - t.g_plus);
                        TongueRow {
                            r: *r,
                            s,
                            g_minus: Some(t.g_minus),
                            g_plus: Some(t.g_plus),
                            width: Some(t.width),
                        }
                    }
                    Ok(SliceOutcome::Empty { .. }) => TongueRow {
                        r: *r,
                        s,
                        g_minus: None,
                        g_plus: None,
                        width: None,
                    },
                    Err(msg) => {
                        failures.push(msg);
                        TongueRow {
                            r: *r,
                            s,
                            g_minus: None,
                            g_plus: None,
                            width: None,
                        }
                    }
                };
                rows.push(row);
            }
            checks.push(CheckRow {
                id: 0,
                name: "g_minus <= g_plus".into(),
                passed: worst_order <= 0.0,
                asserted: true,
                measured: Some(worst_order),
                tolerance: Some(0.0),
                notes: Vec::new(),
            });
            Results::Tongue(rows)
        }
        Command::Adjacency {
            r,
            s_range,
            no_condition,
        } => {
            let fine = cfg.tightened(100.0);
            let scan = find_adjacencies(*r, nu, (s_range.lo, s_range.hi), IDENTITY_TOL, &fine)?;
            failures.extend(
                scan.failures
                    .iter()
                    .map(|f| format!("candidate near s={}: {}", f.s_guess, f.reason)),
            );
            let branches: Vec<Option<u8>> = scan
                .found
                .par_iter()
                .map(|x| {
                    if *no_condition {
                        return Ok(None);
                    }
                    condition_star(&x.params(nu), &fine)
                        .map(|c| c.branch)
                        .map_err(|e| format!("star condition at s={}: {e}", x.s))
                })
                .collect::<Vec<Result<Option<u8>, String>>>()
                .into_iter()
                .map(|b| {
                    b.unwrap_or_else(|msg| {
                        failures.push(msg);
                        None
                    })
                })
                .collect();
            let mut worst = 0.0f64;
            let mut ok = true;
            for x in &scan.found {
                worst = worst.max(x.abscissa_residual);
                ok &= x.invariants_hold(ABSCISSA_TOL);
            }
            checks.push(CheckRow {
                id: 0,
                name: "adjacency invariants".into(),
                passed: ok,
                asserted: true,
                measured: Some(worst),
                tolerance: Some(ABSCISSA_TOL),
                notes: Vec::new(),
            });
            Results::Adjacency(
                scan.found
                    .iter()
                    .zip(branches)
                    .map(|(x, branch)| AdjacencyRow {
                        r: x.r,
                        a: x.a,
                        s: x.s,
                        identity_residual: x.identity_residual,
                        condition_star_branch: branch,
                    })
                    .collect(),
            )
        }
        Command::Monodromy { a, s } => {
            check_finite("a", *a)?;
            check_finite("s", *s)?;
            let params = Params::new(nu, *a, *s)?;
            let m = monodromy(&params, &cfg)?;
            let e = m.matrix;
            Results::Monodromy(vec![MonodromyRow {
                nu,
                a: *a,
                s: *s,
                m11_re: e[0][0].re,
                m11_im: e[0][0].im,
                m12_re: e[0][1].re,
                m12_im: e[0][1].im,
                m21_re: e[1][0].re,
                m21_im: e[1][0].im,
                m22_re: e[1][1].re,
                m22_im: e[1][1].im,
                det_deviation: m.det_deviation(*a),
                projective_deviation: m.projective_deviation,
                integration_error: m.integration_error,
            }])
        }
        Command::Verify { criteria } => {
            let known: Vec<u8> = tongues_core::verify::CRITERIA.iter().map(|c| c.0).collect();
            if let Some(bad) = criteria.iter().find(|c| !known.contains(c)) {
                return Err(CliError::Config(format!("unknown criterion {bad}")));
            }
            let suite = Suite::new(VerifyOptions {
                cfg,
                ..VerifyOptions::default()
            });
            let ids: Vec<u8> = if criteria.is_empty() {
                known
            } else {
                criteria.clone()
            };
            let rows: Vec<CheckRow> = ids.iter().map(|&id| check_row(suite.run(id))).collect();
            checks.extend(rows.iter().cloned());
            Results::Verify(rows)
        }
    };

    Ok(Report {
        command: echo(global, command),
        results,
        checks,
        failures,
        provenance: Provenance {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            rel_tol: cfg.rel_tol,
            abs_tol: cfg.abs_tol,
        },
    })
}

/// ρ must be nondecreasing in `a` along every grid row of length `row_len`.
fn monotone_check(rows: &[GridRow], row_len: usize) -> CheckRow {
    let mut worst = 0.0f64;
    if row_len > 0 {
        for line in rows.chunks(row_len) {
            let rhos: Vec<f64> = line.iter().filter_map(|r| r.rho).collect();
            for w in rhos.windows(2) {
                worst = worst.max(w[0] - w[1]);
            }
        }
    }
    CheckRow {
        id: 0,
        name: "rho nondecreasing in a".into(),
        passed: worst <= MONOTONE_SLACK,
        asserted: true,
        measured: Some(worst),
        tolerance: Some(MONOTONE_SLACK),
        notes: Vec::new(),
    }
}
