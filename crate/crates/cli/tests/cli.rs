use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use rh_doublematch::output::parse_residuals_csv;

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_rh-doublematch"));
    cmd.env_remove("RH_DM_THREADS");
    cmd
}

fn run_with(args: &[&str], config: Option<&str>, dir: &Path) -> Output {
    let mut cmd = bin();
    cmd.args(args).arg("--out").arg(dir.join("out"));
    if let Some(text) = config {
        let path = dir.join("config.json");
        fs::write(&path, text).unwrap();
        cmd.arg("--config").arg(path);
    }
    cmd.output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn profiles_lists_the_three_fixtures() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_with(&["profiles"], None, dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    for (name, k) in [("MB1/2", "1"), ("CL3", "2"), ("NIBP", "1")] {
        let line = text.lines().find(|l| l.starts_with(name)).unwrap_or_else(|| panic!("{name} missing:\n{text}"));
        assert!(line.split_whitespace().any(|w| w == k), "{line}");
    }
}

#[test]
fn match_verify_reference_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_with(&["match-verify"], Some(r#"{"profile": "reference"}"#), dir.path());
    assert_eq!(o.status.code(), Some(0), "{}{}", stdout(&o), stderr(&o));
    let out = dir.path().join("out");
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["pass"], true);
    assert_eq!(report["K"], 1);
    assert!(report["slopes"]["inner"].as_f64().unwrap() <= -1.7);
    assert!(report["slopes"]["outer"].as_f64().unwrap() <= -0.7);
    assert_eq!(report["slopes"]["predicted_inner"], -2.0);
    assert!(report["floor_excluded_points"].is_array());
    assert_eq!(report["config_echo"]["grid_m"], 256);

    let csv = fs::read_to_string(out.join("residuals.csv")).unwrap();
    assert!(!csv.contains('\r'));
    let rows = parse_residuals_csv(&csv).unwrap();
    assert_eq!(rows.len(), 8);
    assert_eq!(rows[0][0], 8.0);
    assert_eq!(rows[0][1], 0.125);
    assert!(fs::read_to_string(out.join("summary.txt")).unwrap().contains("pass: true"));
}

#[test]
fn invalid_profile_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"profile": {"a": 2.5, "b": 3, "c": 4, "d": 2, "e": 2}}"#;
    let o = run_with(&["match-verify"], Some(cfg), dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("invalid exponent profile"), "{}", stderr(&o));
}

#[test]
fn failed_check_exits_with_two() {
    // the Lipschitz slope is 1.997, outside 2 +- 0.001
    let dir = tempfile::tempdir().unwrap();
    let o = run_with(&["scaling-verify"], Some(r#"{"tol_slope": 0.001}"#), dir.path());
    assert_eq!(o.status.code(), Some(2), "{}{}", stdout(&o), stderr(&o));
    assert!(stdout(&o).contains("pass: false"));
}

#[test]
fn config_errors_carry_position_and_field() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_with(&["match-verify"], Some("{\n  \"grid_m\": 256,\n  \"n_min\": 3\n}"), dir.path());
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("n_min") && err.contains("line 3"), "{err}");

    let o = run_with(&["match-verify", "--grid-m", "100"], None, dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("grid_m"));

    let o = bin().arg("no-such-mode").output().unwrap();
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn flags_override_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"mode": "profiles", "n_min_exp": 3, "n_max_exp": 10}"#;
    let o = run_with(&["--mode", "match-verify", "--n-min", "4", "--n-max", "8"], Some(cfg), dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rows = parse_residuals_csv(&fs::read_to_string(dir.path().join("out/residuals.csv")).unwrap()).unwrap();
    assert_eq!(rows.len(), 5);
    assert_eq!(rows[0][0], 16.0);
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let read = |name: &str| fs::read(out.join(name)).unwrap();
    let mut seen = Vec::new();
    for threads in [None, Some("1"), Some("3")] {
        let mut cmd = bin();
        cmd.args(["match-verify", "--seed", "7", "--out"]).arg(&out);
        if let Some(t) = threads {
            cmd.env("RH_DM_THREADS", t);
        }
        assert_eq!(cmd.output().unwrap().status.code(), Some(0));
        seen.push((read("residuals.csv"), read("report.json"), read("summary.txt")));
    }
    assert!(seen.windows(2).all(|w| w[0] == w[1]));

    for _ in 0..2 {
        let o = run_with(&["pi-demo", "--seed", "11"], None, dir.path());
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        seen.push((read("pi_levels.csv"), read("report.json"), read("summary.txt")));
    }
    assert_eq!(seen[3], seen[4]);
}

#[test]
fn bad_thread_count_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin().args(["profiles", "--out"]).arg(dir.path()).env("RH_DM_THREADS", "zero").output().unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("RH_DM_THREADS"));
}

#[test]
fn scaling_verify_reference_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_with(&["scaling-verify"], None, dir.path());
    assert_eq!(o.status.code(), Some(0), "{}{}", stdout(&o), stderr(&o));
    let csv = fs::read_to_string(dir.path().join("out/scaling.csv")).unwrap();
    assert_eq!(csv.lines().count(), 9);
}
