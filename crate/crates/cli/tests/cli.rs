use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn horograph(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_horograph"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn bounds_for_width_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = horograph(&["bounds", "--constant", "1", "--domain", "[0,2]x[0,1]"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let v = json(&dir.path().join("bounds.json"));
    let r = v["R"].as_f64().unwrap();
    assert!((r - 2f64.sqrt()).abs() < 1e-15);
    assert!(std::fs::read_to_string(dir.path().join("bounds.json")).unwrap().contains("1.4142135"));
    assert_eq!(v["hypotheses"]["existence_ok"], Value::Bool(true));
    assert_eq!(v["hypotheses"]["shift_c0"].as_f64(), Some(1.0));
    assert!(v["global_gradient"][0]["bound"]["bound_C"].as_f64().unwrap() > 0.0);
}

#[test]
fn oracle_x_sinh_t_is_a_solution() {
    let dir = tempfile::tempdir().unwrap();
    let out = horograph(&["oracle", "--kind", "x-sinh-t", "--domain", "[1,2]x[1,2]"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("solution"));
    let v = json(&dir.path().join("oracle.json"));
    assert_eq!(v["classification"], "solution");
    let csv = std::fs::read_to_string(dir.path().join("oracle.csv")).unwrap();
    assert!(csv.starts_with("x,t,g\n"));
    assert_eq!(csv.lines().count(), 1 + 33 * 33);
}

#[test]
fn horocylinder_is_a_subsolution() {
    let dir = tempfile::tempdir().unwrap();
    let out = horograph(&["oracle", "--kind", "horocylinder", "--c", "0.7", "--eps", "0.3"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&dir.path().join("oracle.json"))["classification"], "subsolution");
}

#[test]
fn convergence_order_is_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = horograph(&["convergence", "--oracle", "geodesic-plane", "--grids", "33,65,129"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let v = json(&dir.path().join("convergence.json"));
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 3);
    for row in &rows[1..] {
        let order = row["order"].as_f64().unwrap();
        assert!((order - 2.0).abs() <= 0.1, "order {order}");
    }
}

#[test]
fn identical_runs_give_identical_reports() {
    let runs: Vec<(String, String)> = (0..2)
        .map(|_| {
            let dir = tempfile::tempdir().unwrap();
            let out = horograph(
                &["oracle", "--kind", "geodesic-plane", "--eps", "0.25", "--seed", "7", "--grid", "17,9"],
                dir.path(),
            );
            assert_eq!(out.status.code(), Some(0));
            let sub = dir.path().join("c");
            let out = horograph(&["continuation", "--constant", "1.2", "--grid", "9,9", "--s-steps", "5"], &sub);
            assert_eq!(out.status.code(), Some(0));
            (
                std::fs::read_to_string(dir.path().join("oracle.json")).unwrap(),
                std::fs::read_to_string(sub.join("schedule.json")).unwrap(),
            )
        })
        .collect();
    assert_eq!(runs[0], runs[1]);
}

#[test]
fn solve_then_verify_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("problem.json");
    std::fs::write(
        &config,
        r#"{"domain": {"kind": "rectangle", "x_min": 0.5, "x_max": 1.5, "t_min": 0.0, "t_max": 1.0},
            "grid": [17, 17],
            "boundary": {"kind": "oracle", "oracle": {"kind": "geodesic-plane", "radius": 2.0, "center": [1.0]}}}"#,
    )
    .unwrap();
    let cfg = config.to_str().unwrap();
    let out = horograph(&["solve", "--config", cfg], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let solve = json(&dir.path().join("solve.json"));
    assert!(solve["max_error_vs_oracle"].as_f64().unwrap() < 1e-3);

    let field = dir.path().join("field.csv");
    let vdir = dir.path().join("verify");
    let out = horograph(&["verify", "--field", field.to_str().unwrap(), "--config", cfg], &vdir);
    assert_eq!(out.status.code(), Some(0));
    let report = json(&vdir.join("report.json"));
    assert_eq!(report["length_bound"]["pass"], Value::Bool(true));
    assert_eq!(report["modulus"]["violations"].as_u64(), Some(0));

    // Without a config the rectangle is inferred from the coordinates.
    let out = horograph(&["verify", "--field", field.to_str().unwrap()], &dir.path().join("inferred"));
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn verification_failures_are_data() {
    let dir = tempfile::tempdir().unwrap();
    let field = dir.path().join("flat.csv");
    let mut text = String::from("x,t,g\n");
    for j in 0..9 {
        for i in 0..9 {
            text.push_str(&format!("{},{},1\n", i as f64 / 8.0, j as f64 / 8.0));
        }
    }
    std::fs::write(&field, text).unwrap();
    let out = horograph(&["verify", "--field", field.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("fail"));
    assert_eq!(json(&dir.path().join("report.json"))["length_bound"]["pass"], Value::Bool(false));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad_domain = horograph(&["solve", "--domain", "[0,1]"], dir.path());
    assert_eq!(bad_domain.status.code(), Some(2));
    let missing = horograph(&["solve", "--config", "/nonexistent/problem.json"], dir.path());
    assert_eq!(missing.status.code(), Some(2));
    let unknown = horograph(&["oracle", "--kind", "sphere"], dir.path());
    assert_eq!(unknown.status.code(), Some(2));
    let negative = horograph(&["solve", "--constant", "-1"], dir.path());
    assert_eq!(negative.status.code(), Some(2));
    let diverged = horograph(&["solve", "--oracle", "geodesic-plane", "--max-newton-iters", "1"], dir.path());
    assert_eq!(diverged.status.code(), Some(1));
}

#[test]
fn thread_count_does_not_change_results() {
    let read = |threads: &str| {
        let dir = tempfile::tempdir().unwrap();
        let out = Command::new(env!("CARGO_BIN_EXE_horograph"))
            .env("HOROGRAPH_THREADS", threads)
            .args(["solve", "--oracle", "x-sinh-t", "--grid", "25,25", "--out"])
            .arg(dir.path())
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(0));
        std::fs::read_to_string(dir.path().join("field.csv")).unwrap()
    };
    assert_eq!(read("1"), read("4"));
}
