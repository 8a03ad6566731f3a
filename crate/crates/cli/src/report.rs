//! Report records and their CSV / JSON serializations.
//!
//! CSV numbers carry 15 significant digits; JSON keeps full precision so a
//! report parses back to an equal value. Non-finite numbers are written as
//! empty CSV fields and JSON `null`.

use serde::{Deserialize, Serialize};
use std::fs;
use std::io::Write;
use std::path::Path;

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RotnumRow {
    pub nu: f64,
    pub a: f64,
    pub s: f64,
    pub rho: f64,
    pub locked_r: Option<i64>,
    pub iterations: usize,
    pub residual: Option<f64>,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridRow {
    pub a: f64,
    pub s: f64,
    /// Missing when the point failed; see the report's failures.
    pub rho: Option<f64>,
    pub locked_r: Option<i64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TongueRow {
    pub r: i64,
    pub s: f64,
    /// All three missing for an empty slice.
    pub g_minus: Option<f64>,
    pub g_plus: Option<f64>,
    pub width: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdjacencyRow {
    pub r: i64,
    pub a: f64,
    pub s: f64,
    pub identity_residual: f64,
    pub condition_star_branch: Option<u8>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonodromyRow {
    pub nu: f64,
    pub a: f64,
    pub s: f64,
    pub m11_re: f64,
    pub m11_im: f64,
    pub m12_re: f64,
    pub m12_im: f64,
    pub m21_re: f64,
    pub m21_im: f64,
    pub m22_re: f64,
    pub m22_im: f64,
    pub det_deviation: f64,
    pub projective_deviation: f64,
    pub integration_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRow {
    pub id: u8,
    pub name: String,
    pub passed: bool,
    pub asserted: bool,
    pub measured: Option<f64>,
    pub tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "rows", rename_all = "lowercase")]
pub enum Results {
    Rotnum(Vec<RotnumRow>),
    Grid(Vec<GridRow>),
    Tongue(Vec<TongueRow>),
    Adjacency(Vec<AdjacencyRow>),
    Monodromy(Vec<MonodromyRow>),
    Verify(Vec<CheckRow>),
}

impl Results {
    pub fn len(&self) -> usize {
        match self {
            Results::Rotnum(v) => v.len(),
            Results::Grid(v) => v.len(),
            Results::Tongue(v) => v.len(),
            Results::Adjacency(v) => v.len(),
            Results::Monodromy(v) => v.len(),
            Results::Verify(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub rel_tol: f64,
    pub abs_tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    /// Echo of the command line (without output options).
    pub command: Vec<String>,
    pub results: Results,
    pub checks: Vec<CheckRow>,
    /// Per-point failures that did not abort the run.
    pub failures: Vec<String>,
    pub provenance: Provenance,
}

impl Report {
    pub fn all_checks_pass(&self) -> bool {
        self.checks.iter().all(|c| c.passed || !c.asserted)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Shortest representation of `x` rounded to 15 significant digits,
/// in exponent notation outside `[1e-4, 1e15)`.
pub fn fmt15(x: f64) -> String {
    if !x.is_finite() {
        return String::new();
    }
    let rounded: f64 = format!("{x:.14e}").parse().unwrap_or(x);
    let mag = rounded.abs();
    if mag != 0.0 && !(1e-4..1e15).contains(&mag) {
        format!("{rounded:e}")
    } else {
        format!("{rounded}")
    }
}

fn opt15(x: Option<f64>) -> String {
    x.map(fmt15).unwrap_or_default()
}

fn opt_int<T: ToString>(x: Option<T>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

/// Header and rows of the CSV table for `results`.
pub fn csv_table(results: &Results) -> (Vec<&'static str>, Vec<Vec<String>>) {
    match results {
        Results::Rotnum(rows) => (
            vec![
                "nu",
                "a",
                "s",
                "rho",
                "locked_r",
                "iterations",
                "residual",
                "converged",
            ],
            rows.iter()
                .map(|r| {
                    vec![
                        fmt15(r.nu),
                        fmt15(r.a),
                        fmt15(r.s),
                        fmt15(r.rho),
                        opt_int(r.locked_r),
                        r.iterations.to_string(),
                        opt15(r.residual),
                        r.converged.to_string(),
                    ]
                })
                .collect(),
        ),
        Results::Grid(rows) => (
            vec!["a", "s", "rho", "locked_r"],
            rows.iter()
                .map(|r| vec![fmt15(r.a), fmt15(r.s), opt15(r.rho), opt_int(r.locked_r)])
                .collect(),
        ),
        Results::Tongue(rows) => (
            vec!["r", "s", "g_minus", "g_plus", "width"],
            rows.iter()
                .map(|r| {
                    vec![
                        r.r.to_string(),
                        fmt15(r.s),
                        opt15(r.g_minus),
                        opt15(r.g_plus),
                        opt15(r.width),
                    ]
                })
                .collect(),
        ),
        Results::Adjacency(rows) => (
            vec!["r", "a", "s", "identity_residual", "condition_star_branch"],
            rows.iter()
                .map(|r| {
                    vec![
                        r.r.to_string(),
                        fmt15(r.a),
                        fmt15(r.s),
                        fmt15(r.identity_residual),
                        opt_int(r.condition_star_branch),
                    ]
                })
                .collect(),
        ),
        Results::Monodromy(rows) => (
            vec![
                "nu",
                "a",
                "s",
                "m11_re",
                "m11_im",
                "m12_re",
                "m12_im",
                "m21_re",
                "m21_im",
                "m22_re",
                "m22_im",
                "det_deviation",
                "projective_deviation",
                "integration_error",
            ],
            rows.iter()
                .map(|r| {
                    [
                        r.nu,
                        r.a,
                        r.s,
                        r.m11_re,
                        r.m11_im,
                        r.m12_re,
                        r.m12_im,
                        r.m21_re,
                        r.m21_im,
                        r.m22_re,
                        r.m22_im,
                        r.det_deviation,
                        r.projective_deviation,
                        r.integration_error,
                    ]
                    .into_iter()
                    .map(fmt15)
                    .collect()
                })
                .collect(),
        ),
        Results::Verify(rows) => (
            vec!["id", "name", "passed", "asserted", "measured", "tolerance"],
            rows.iter()
                .map(|r| {
                    vec![
                        r.id.to_string(),
                        r.name.clone(),
                        r.passed.to_string(),
                        r.asserted.to_string(),
                        opt15(r.measured),
                        opt15(r.tolerance),
                    ]
                })
                .collect(),
        ),
    }
}

pub fn to_csv(results: &Results) -> Result<Vec<u8>, CliError> {
    let (header, rows) = csv_table(results);
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.into_inner()
        .map_err(|e| CliError::Io(format!("csv buffer: {e}")))
}

pub fn to_json(report: &Report) -> Result<Vec<u8>, CliError> {
    let mut out = serde_json::to_vec_pretty(report)?;
    out.push(b'\n');
    Ok(out)
}

/// Serialize `report` in `format` to `out`, or to stdout when `out` is `None`.
pub fn emit(report: &Report, format: Format, out: Option<&Path>) -> Result<(), CliError> {
    let bytes = match format {
        Format::Csv => to_csv(&report.results)?,
        Format::Json => to_json(report)?,
    };
    match out {
        Some(path) => fs::write(path, &bytes)
            .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display()))),
        None => std::io::stdout()
            .write_all(&bytes)
            .map_err(|e| CliError::Io(format!("stdout: {e}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fifteen_digits() {
        assert_eq!(fmt15(2f64.sqrt()), "1.4142135623731");
        assert_eq!(fmt15(0.1), "0.1");
        assert_eq!(fmt15(-3.0), "-3");
        assert_eq!(fmt15(1e-20), "1e-20");
        assert_eq!(fmt15(-7.362_096_113_446_66e-12), "-7.36209611344666e-12");
        assert_eq!(fmt15(2.0f64.sqrt() * 1e-8), "1.4142135623731e-8");
        assert_eq!(fmt15(0.0), "0");
        assert_eq!(fmt15(f64::NAN), "");
    }

    #[test]
    fn empty_results_give_header_only() {
        let bytes = to_csv(&Results::Adjacency(Vec::new())).unwrap();
        assert_eq!(
            String::from_utf8(bytes).unwrap(),
            "r,a,s,identity_residual,condition_star_branch\n"
        );
    }
}
