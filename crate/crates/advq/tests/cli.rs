//! End-to-end tests of the batch front end: exit codes, emitted files, and
//! seed determinism.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn advq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_advq"))
        .args(args)
        .env("ADVQ_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn path_str(p: &Path) -> String {
    p.to_str().unwrap().to_string()
}

#[test]
fn oracle_check_passes_on_fixtures() {
    for problem in ["singlebit.json", "or2.json"] {
        let out = advq(&["oracle-check", "--problem", &path_str(&fixture(problem))]);
        assert_eq!(out.status.code(), Some(0), "{problem}");
        let stdout = String::from_utf8_lossy(&out.stdout);
        assert!(stdout.contains("label,residual"));
    }
}

#[test]
fn verify_witness_accepts_bundled_witnesses() {
    let out = advq(&[
        "verify-witness",
        "--problem",
        &path_str(&fixture("singlebit.json")),
        "--witness",
        &path_str(&fixture("singlebit_witness.json")),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("feasible: true"));
}

#[test]
fn verify_witness_rejects_infeasible_with_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    // scale only the u side: the factorization no longer reproduces ρ - σ
    let text = fs::read_to_string(fixture("singlebit_witness.json")).unwrap();
    let broken = text.replace("\"re\": 1.0", "\"re\": 2.0");
    let path = dir.path().join("broken.json");
    fs::write(&path, broken).unwrap();
    let out = advq(&[
        "verify-witness",
        "--problem",
        &path_str(&fixture("singlebit.json")),
        "--witness",
        &path_str(&path),
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn malformed_problem_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    fs::write(&path, "{\"alphabet\": 1}").unwrap();
    let out = advq(&["oracle-check", "--problem", &path_str(&path)]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn run_emits_deterministic_tables() {
    let dir1 = tempfile::tempdir().unwrap();
    let dir2 = tempfile::tempdir().unwrap();
    let run_into = |dir: &Path| {
        let out = advq(&[
            "run",
            "--problem",
            &path_str(&fixture("singlebit.json")),
            "--witness",
            &path_str(&fixture("singlebit_witness.json")),
            "--epsilon",
            "0.3",
            "--steps",
            "1024",
            "--grid",
            "21",
            "--seed",
            "7",
            "--out-dir",
            &path_str(dir),
        ]);
        assert_eq!(out.status.code(), Some(0));
        let table = fs::read_to_string(dir.join("overlaps.csv")).unwrap();
        assert!(table.starts_with("label,epsilon,tau,overlap"));
        assert!(dir.join("trace_0_0.3.csv").exists());
        assert!(dir.join("run.json").exists());
        table
    };
    let first = run_into(dir1.path());
    let second = run_into(dir2.path());
    assert_eq!(first, second, "same seed and inputs reproduce the table");
}

#[test]
fn run_skips_trivial_conversion() {
    // rho = sigma: witness value 0 < eps/2, the run must do nothing and pass
    let dir = tempfile::tempdir().unwrap();
    let problem = serde_json::json!({
        "alphabet": 2,
        "n": 1,
        "inputs": ["0", "1"],
        "rho": [[{"re": 1.0, "im": 0.0}, {"re": 0.0, "im": 0.0}],
                 [{"re": 0.0, "im": 0.0}, {"re": 1.0, "im": 0.0}]],
        "sigma": [[{"re": 1.0, "im": 0.0}, {"re": 0.0, "im": 0.0}],
                  [{"re": 0.0, "im": 0.0}, {"re": 1.0, "im": 0.0}]],
    });
    let path = dir.path().join("trivial.json");
    fs::write(&path, problem.to_string()).unwrap();
    let out = advq(&[
        "run",
        "--problem",
        &path_str(&path),
        "--epsilon",
        "0.5",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("skipped"));
}

#[test]
fn verify_proposition_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = advq(&[
        "verify-proposition",
        "--problem",
        &path_str(&fixture("singlebit.json")),
        "--witness",
        &path_str(&fixture("singlebit_witness.json")),
        "--epsilon",
        "0.2",
        "--grid",
        "31",
        "--out-dir",
        &path_str(dir.path()),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let report = fs::read_to_string(dir.path().join("proposition_report.json")).unwrap();
    let value: serde_json::Value = serde_json::from_str(&report).unwrap();
    assert_eq!(value["pass"], serde_json::Value::Bool(true));
}

#[test]
fn sweep_tau_honours_canonical_factor() {
    let dir = tempfile::tempdir().unwrap();
    let out = advq(&[
        "sweep-tau",
        "--problem",
        &path_str(&fixture("singlebit.json")),
        "--witness",
        &path_str(&fixture("singlebit_witness.json")),
        "--epsilon",
        "0.5",
        "--tau-factor",
        "0.25",
        "--tau-factor",
        "1",
        "--steps",
        "1024",
        "--grid",
        "11",
        "--out-dir",
        &path_str(dir.path()),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let sweep = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert!(sweep.starts_with("tau_factor,label,epsilon,tau,eps_ap,overlap"));
    // two factors × two inputs
    assert_eq!(sweep.lines().count(), 5);
}

#[test]
fn lower_bound_reports_implied_time() {
    let dir = tempfile::tempdir().unwrap();
    let out = advq(&[
        "lower-bound",
        "--problem",
        &path_str(&fixture("singlebit.json")),
        "--witness",
        &path_str(&fixture("singlebit_witness.json")),
        "--certificate",
        &path_str(&fixture("singlebit_certificate.json")),
        "--epsilon",
        "0.5",
        "--samples",
        "2049",
        "--steps",
        "2048",
        "--out-dir",
        &path_str(dir.path()),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report = fs::read_to_string(dir.path().join("bound_report.json")).unwrap();
    let value: serde_json::Value = serde_json::from_str(&report).unwrap();
    assert!((value["implied_t"].as_f64().unwrap() - 0.5).abs() < 1e-9);
    let progress = fs::read_to_string(dir.path().join("progress.csv")).unwrap();
    assert!(progress.starts_with("t,w,dwdt,bound"));
}

#[test]
fn solve_adversary_writes_witness_and_certificate() {
    let dir = tempfile::tempdir().unwrap();
    let out = advq(&[
        "solve-adversary",
        "--problem",
        &path_str(&fixture("or2.json")),
        "--seed",
        "3",
        "--out-dir",
        &path_str(dir.path()),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let witness = fs::read_to_string(dir.path().join("witness.json")).unwrap();
    let value: serde_json::Value = serde_json::from_str(&witness).unwrap();
    let got = value["value"].as_f64().unwrap();
    assert!((got - 2f64.sqrt()).abs() <= 0.1 * 2f64.sqrt(), "value {got}");
    assert!(dir.path().join("certificate.json").exists());
    assert!(dir.path().join("solve_report.json").exists());
}

#[test]
fn out_of_range_epsilon_exits_2() {
    let out = advq(&[
        "run",
        "--problem",
        &path_str(&fixture("singlebit.json")),
        "--witness",
        &path_str(&fixture("singlebit_witness.json")),
        "--epsilon",
        "1.5",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn integrator_non_convergence_exits_4() {
    let out = advq(&[
        "run",
        "--problem",
        &path_str(&fixture("singlebit.json")),
        "--witness",
        &path_str(&fixture("singlebit_witness.json")),
        "--epsilon",
        "0.1",
        "--steps",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(4), "{}", String::from_utf8_lossy(&out.stderr));
}
