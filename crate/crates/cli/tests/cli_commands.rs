//! End-to-end checks of the command binary: exit codes, CSV schema,
//! diagnostics routing and flag handling.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_gronwall"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary must run")
}

fn write_problem(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path
}

const EXAMPLE1: &str = r#"
[problem]
theorem = "outer_power"
horizon = 2.0
kappa = 1.0
gamma1 = 5
gamma2 = 4
gamma3 = 3
gamma4 = 3

[functions]
a = "x"
f = "sqrt(x)"
psi1 = "2"
psi2 = "3"
psi3 = "x"
"#;

const EXAMPLE2: &str = r#"
[problem]
theorem = "additive"
horizon = 2.0
gamma1 = 3
gamma2 = 2

[functions]
a = "1 + 2*x"
f = "cbrt(x)"
psi1 = "2"
psi2 = "x"
psi3 = "5"
psi4 = "7"
psi5 = "x"
psi6 = "x"
"#;

fn stderr_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn eval_example1_writes_curve_starting_at_two_fifths() {
    let dir = tempfile::tempdir().unwrap();
    let problem = write_problem(dir.path(), "e1.prob", EXAMPLE1);
    let csv = dir.path().join("curve.csv");
    let out = run(&["eval", problem.to_str().unwrap(), "-o", csv.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));
    let data = fs::read_to_string(&csv).unwrap();
    let mut lines = data.lines();
    assert_eq!(lines.next().unwrap(), "delta,value");
    let first = lines.next().unwrap();
    let mut cols = first.split(',');
    assert_eq!(cols.next().unwrap().parse::<f64>().unwrap(), 0.0);
    let v0: f64 = cols.next().unwrap().parse().unwrap();
    assert!((v0 - 0.4).abs() < 1e-9, "delta = 0 row was {v0}");
    // warnings routed to stderr, data clean
    assert!(stderr_of(&out).contains("a(delta) >= 1"));
}

#[test]
fn eval_emits_csv_to_stdout_with_dash() {
    let dir = tempfile::tempdir().unwrap();
    let problem = write_problem(dir.path(), "e2.prob", EXAMPLE2);
    let out = run(&["eval", problem.to_str().unwrap(), "-o", "-"]);
    assert_eq!(out.status.code(), Some(0));
    let stdout = stdout_of(&out);
    assert!(stdout.starts_with("delta,value\n"));
    assert_eq!(stdout.lines().count(), 66); // header + 65 points
}

#[test]
fn emitted_csv_reparses_to_twelve_significant_digits() {
    let dir = tempfile::tempdir().unwrap();
    let problem = write_problem(dir.path(), "e2.prob", EXAMPLE2);
    let csv = dir.path().join("curve.csv");
    let out = run(&["eval", problem.to_str().unwrap(), "-o", csv.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    for line in fs::read_to_string(&csv).unwrap().lines().skip(1) {
        for field in line.split(',') {
            let value: f64 = field.parse().expect("field must parse as f64");
            let reprinted = format!("{value:.11e}");
            assert_eq!(reprinted, field, "12-digit round trip failed");
        }
    }
}

#[test]
fn doubling_retardation_fails_hypotheses_with_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let problem = write_problem(
        dir.path(),
        "bad.prob",
        "[problem]\ntheorem = \"additive\"\nhorizon = 1\n[functions]\nf = \"2*x\"\n",
    );
    let csv = dir.path().join("never.csv");
    let out = run(&["eval", problem.to_str().unwrap(), "-o", csv.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_of(&out).contains("f(delta) <= delta"));
    assert!(!csv.exists());
}

#[test]
fn malformed_expression_exits_1_with_offset() {
    let dir = tempfile::tempdir().unwrap();
    let problem = write_problem(
        dir.path(),
        "broken.prob",
        "[problem]\ntheorem = \"additive\"\nhorizon = 1\n[functions]\na = \"sqrt(x\"\n",
    );
    let out = run(&["eval", problem.to_str().unwrap(), "-o", "-"]);
    assert_eq!(out.status.code(), Some(1));
    let err = stderr_of(&out);
    assert!(err.contains("offset 6"), "stderr: {err}");
}

#[test]
fn unknown_key_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let problem = write_problem(
        dir.path(),
        "odd.prob",
        "[problem]\ntheorem = \"additive\"\nhorizon = 1\nyolo = 2\n",
    );
    let out = run(&["eval", problem.to_str().unwrap(), "-o", "-"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr_of(&out).contains("yolo"));
}

#[test]
fn verify_example2_holds_with_four_column_csv() {
    let dir = tempfile::tempdir().unwrap();
    let problem = write_problem(dir.path(), "e2.prob", EXAMPLE2);
    let csv = dir.path().join("verify.csv");
    let out = run(&[
        "verify",
        problem.to_str().unwrap(),
        "-o",
        csv.to_str().unwrap(),
        "--grid",
        "129",
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));
    assert!(stderr_of(&out).contains("verdict holds"));
    let data = fs::read_to_string(&csv).unwrap();
    assert!(data.starts_with("delta,value,u_sat,margin\n"));
    assert_eq!(data.lines().count(), 130);
    // margin column equals bound - u_sat
    for line in data.lines().skip(1) {
        let cols: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        assert!((cols[3] - (cols[1] - cols[2])).abs() <= 1e-9 * (1.0 + cols[1].abs()));
    }
}

#[test]
fn verify_example1_reports_localized_violation_with_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let problem = write_problem(dir.path(), "e1.prob", EXAMPLE1);
    let csv = dir.path().join("verify.csv");
    let out = run(&[
        "verify",
        problem.to_str().unwrap(),
        "-o",
        csv.to_str().unwrap(),
        "--grid",
        "129",
    ]);
    // the first worked instance breaks its own hypotheses below delta = 1
    // and the saturated solution crosses the bound there; strict mode makes
    // that a reportable violation, with the CSV still written
    assert_eq!(out.status.code(), Some(3), "stderr: {}", stderr_of(&out));
    let err = stderr_of(&out);
    assert!(err.contains("verdict violated"));
    assert!(err.contains("first margin crossing"));
    assert!(csv.exists());
}

#[test]
fn verify_example1_report_only_exits_0() {
    let dir = tempfile::tempdir().unwrap();
    let problem = write_problem(dir.path(), "e1.prob", EXAMPLE1);
    let csv = dir.path().join("verify.csv");
    let out = run(&[
        "verify",
        problem.to_str().unwrap(),
        "-o",
        csv.to_str().unwrap(),
        "--grid",
        "129",
        "--dominance",
        "report-only",
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));
    assert!(stderr_of(&out).contains("report-only"));
}

#[test]
fn verify_blow_up_detected_on_long_horizon_only() {
    let dir = tempfile::tempdir().unwrap();
    let short = write_problem(
        dir.path(),
        "short.prob",
        "[problem]\ntheorem = \"additive\"\nhorizon = 1\n[functions]\na = \"exp(10*x)\"\n",
    );
    let out = run(&["verify", short.to_str().unwrap(), "-o", "-", "--grid", "129"]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));

    let long = write_problem(
        dir.path(),
        "long.prob",
        "[problem]\ntheorem = \"additive\"\nhorizon = 3\n[functions]\na = \"exp(10*x)\"\n",
    );
    let out = run(&["verify", long.to_str().unwrap(), "-o", "-", "--grid", "129"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr_of(&out).contains("blow-up"));
}

#[test]
fn reproduce_rejects_unknown_instance() {
    let out = run(&["reproduce", "3", "-o", "-"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn reductions_strict_mode_reports_the_limit_discrepancy() {
    let out = run(&["reductions", "--strict-limits"]);
    assert_eq!(out.status.code(), Some(1));
    let stdout = stdout_of(&out);
    assert!(stdout.contains("strict_vs_fixed"), "stdout: {stdout}");
    assert!(stdout.contains("FAIL"), "stdout: {stdout}");
}

#[test]
fn hypotheses_reports_statuses() {
    let dir = tempfile::tempdir().unwrap();
    let problem = write_problem(dir.path(), "e1.prob", EXAMPLE1);
    let out = run(&["hypotheses", problem.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let stdout = stdout_of(&out);
    assert!(stdout.contains("theorem: outer_power"));
    assert!(stdout.contains("warning"));
    assert!(stdout.contains("holds"));
}

#[test]
fn hypotheses_hard_failure_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let problem = write_problem(
        dir.path(),
        "bad.prob",
        "[problem]\ntheorem = \"additive\"\nhorizon = 1\n[functions]\nf = \"2*x\"\n",
    );
    let out = run(&["hypotheses", problem.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stdout_of(&out).contains("violated"));
}

#[test]
fn zeta6_denominator_flag_changes_the_mixed_bound() {
    let dir = tempfile::tempdir().unwrap();
    // gamma3 != gamma1 and psi2 active, so zeta6 enters the forcing term
    let problem = write_problem(
        dir.path(),
        "mixed.prob",
        "[problem]\ntheorem = \"integrodiff_mixed\"\nhorizon = 1\ngamma1 = 3\ngamma2 = 2\ngamma3 = 2\n[functions]\npsi2 = \"1\"\n",
    );
    let a = run(&["eval", problem.to_str().unwrap(), "-o", "-"]);
    let b = run(&[
        "eval",
        problem.to_str().unwrap(),
        "-o",
        "-",
        "--zeta6-denom",
        "gamma3",
    ]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(b.status.code(), Some(0));
    assert_ne!(stdout_of(&a), stdout_of(&b));
}
