use std::path::Path;
use std::process::{Command, Output};

use tongues_cli::report::Report;

fn tongues(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tongues"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn csv_rows(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut rdr = csv::Reader::from_path(path).unwrap();
    let header = rdr.headers().unwrap().iter().map(String::from).collect();
    let rows = rdr
        .records()
        .map(|r| r.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

fn field(header: &[String], row: &[String], name: &str) -> f64 {
    let i = header.iter().position(|h| h == name).unwrap();
    row[i].parse().unwrap()
}

#[test]
fn rotnum_locks_on_zero_axis() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("rho.csv");
    let st = tongues(&[
        "--nu",
        "1",
        "rotnum",
        "--a",
        "0",
        "--s",
        "2.5",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(
        st.status.success(),
        "{}",
        String::from_utf8_lossy(&st.stderr)
    );
    let (header, rows) = csv_rows(&out);
    assert_eq!(rows.len(), 1);
    assert_eq!(field(&header, &rows[0], "rho"), 0.0);
    assert_eq!(field(&header, &rows[0], "locked_r"), 0.0);
}

#[test]
fn tongue_tip_at_zero_forcing() {
    let st = tongues(&["tongue", "--r", "1", "--s", "0"]);
    assert!(st.status.success());
    let text = String::from_utf8(st.stdout).unwrap();
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> = rdr.headers().unwrap().iter().map(String::from).collect();
    let row: Vec<String> = rdr
        .records()
        .next()
        .unwrap()
        .unwrap()
        .iter()
        .map(String::from)
        .collect();
    let g_minus = field(&header, &row, "g_minus");
    let g_plus = field(&header, &row, "g_plus");
    assert!((g_minus - 2f64.sqrt()).abs() < 1e-8, "{g_minus}");
    assert!((g_plus - 2f64.sqrt()).abs() < 1e-8, "{g_plus}");
}

#[test]
fn row_count_matches_grid() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("grid.csv");
    let st = tongues(&[
        "grid",
        "--a-range",
        "-1:1:0.5",
        "--s-range",
        "0:2:1",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(st.status.success());
    let (header, rows) = csv_rows(&out);
    assert_eq!(header, ["a", "s", "rho", "locked_r"]);
    assert_eq!(rows.len(), 15);
    for row in &rows {
        let a = field(&header, row, "a");
        let rho = field(&header, row, "rho");
        assert!(rho >= a - 1.0 - 1e-9 && rho <= a + 1.0 + 1e-9);
    }
}

#[test]
fn empty_result_is_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("adj.csv");
    let st = tongues(&[
        "adjacency",
        "--r",
        "0",
        "--s-range",
        "0.1:0.5",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(st.status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text, "r,a,s,identity_residual,condition_star_branch\n");
}

#[test]
fn json_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("m.json");
    let st = tongues(&[
        "--format",
        "json",
        "--nu",
        "-1",
        "monodromy",
        "--a",
        "0.3",
        "--s",
        "-1.5",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(
        st.status.success(),
        "{}",
        String::from_utf8_lossy(&st.stderr)
    );
    let text = std::fs::read_to_string(&out).unwrap();
    let report: Report = serde_json::from_str(&text).unwrap();
    assert_eq!(report.results.len(), 1);
    let again = serde_json::to_string_pretty(&report).unwrap() + "\n";
    assert_eq!(again, text);
}

#[test]
fn repeated_runs_are_identical() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, threads: &str| {
        let out = dir.path().join(name);
        let st = tongues(&[
            "--format",
            "json",
            "--threads",
            threads,
            "tongue",
            "--r",
            "0",
            "--s-range",
            "0:3:0.25",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(st.status.success());
        std::fs::read(out).unwrap()
    };
    assert_eq!(run("a.json", "1"), run("b.json", "4"));
}

#[test]
fn invalid_configuration_exits_2() {
    for args in [
        &["--nu", "0", "rotnum", "--a", "0", "--s", "1"][..],
        &["--tol", "-1", "rotnum", "--a", "0", "--s", "1"],
        &["grid", "--a-range", "1:0", "--s-range", "0:1"],
        &["tongue", "--r", "0"],
        &["verify", "99"],
        &[
            "rotnum",
            "--a",
            "0",
            "--s",
            "1",
            "--out",
            "/nonexistent-dir/x.csv",
        ],
    ] {
        let st = tongues(args);
        assert_eq!(st.status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn verify_subset_passes() {
    let st = tongues(&["verify", "2", "10"]);
    assert!(
        st.status.success(),
        "{}",
        String::from_utf8_lossy(&st.stderr)
    );
    let text = String::from_utf8(st.stdout).unwrap();
    assert_eq!(text.lines().count(), 3);
    assert!(text.lines().skip(1).all(|l| l.contains(",true,true,")));
}
