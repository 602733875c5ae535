//! End-to-end tests of the `qdem` binary: flags, formats, exit codes.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn qdem(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qdem"))
        .args(args)
        .output()
        .expect("binary spawns")
}

fn ok_stdout(args: &[&str]) -> String {
    let out = qdem(args);
    assert!(
        out.status.success(),
        "qdem {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).expect("utf8 stdout")
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

/// Parses a two-column profile CSV body into (abscissa, value) pairs.
fn parse_profile(csv: &str) -> Vec<(f64, f64)> {
    csv.lines()
        .skip(1)
        .map(|l| {
            let (a, b) = l.split_once(',').expect("two columns");
            (a.parse().unwrap(), b.parse().unwrap())
        })
        .collect()
}

#[test]
fn help_lists_every_flag() {
    let mut all = ok_stdout(&["--help"]);
    for sub in ["sample", "exact", "hydro", "pde", "experiment"] {
        all.push_str(&ok_stdout(&[sub, "--help"]));
    }
    for flag in [
        "--n", "--p", "--q", "--x", "--lambda", "--seed", "--samples", "--grid", "--cells",
        "--out", "--format", "--strict", "--threads",
    ] {
        assert!(all.contains(flag), "help never mentions {flag}");
    }
}

#[test]
fn sample_is_a_pure_function_of_the_seed() {
    let args = ["sample", "--n", "30", "--p", "0.6", "--q", "0.4", "--seed", "7", "--samples", "5"];
    let first = ok_stdout(&args);
    let second = ok_stdout(&args);
    assert_eq!(first, second);
    assert_eq!(first.lines().count(), 5);

    let other = ok_stdout(&[
        "sample", "--n", "30", "--p", "0.6", "--q", "0.4", "--seed", "8", "--samples", "5",
    ]);
    assert_ne!(first, other, "different seeds should differ at n = 30");
}

#[test]
fn sample_degenerate_parameters_hit_the_extremes() {
    let w0 = ok_stdout(&["sample", "--n", "6", "--p", "1", "--q", "0.3", "--seed", "1", "--samples", "3"]);
    for line in w0.lines() {
        assert_eq!(line, "6 5 4 3 2 1");
    }
    let id = ok_stdout(&["sample", "--n", "6", "--p", "0", "--q", "0.3", "--seed", "1", "--samples", "3"]);
    for line in id.lines() {
        assert_eq!(line, "1 2 3 4 5 6");
    }
}

#[test]
fn exact_law_is_sorted_normalized_and_matches_goldens() {
    let text = ok_stdout(&["exact", "--n", "3", "--p", "0.5", "--q", "0.5"]);
    let law: Vec<Value> = serde_json::from_str(&text).expect("law JSON");
    assert_eq!(law.len(), 6);

    let probs: Vec<f64> = law.iter().map(|e| e["prob"].as_f64().unwrap()).collect();
    assert!(probs.windows(2).all(|w| w[0] >= w[1]), "probs not sorted: {probs:?}");
    let total: f64 = probs.iter().sum();
    assert!((total - 1.0).abs() < 1e-12);

    let prob_of = |perm: &str| {
        law.iter()
            .find(|e| e["perm"] == perm)
            .unwrap_or_else(|| panic!("{perm} missing"))["prob"]
            .as_f64()
            .unwrap()
    };
    assert!((prob_of("1 2 3") - 0.1875).abs() < 1e-12);
    assert!((prob_of("1 3 2") - 0.3125).abs() < 1e-12);
    assert!((prob_of("3 2 1") - 0.125).abs() < 1e-12);
}

#[test]
fn exact_law_cap_is_a_usage_error() {
    let out = qdem(&["exact", "--n", "9", "--p", "0.5", "--q", "0.5"]);
    assert_eq!(exit_code(&out), 2);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("7"), "cap not named: {err}");
}

#[test]
fn missing_seed_is_a_usage_error() {
    let out = qdem(&["sample", "--n", "5", "--p", "0.5", "--q", "0.5"]);
    assert_eq!(exit_code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("--seed"));
}

#[test]
fn csv_format_without_out_is_a_usage_error() {
    let out = qdem(&[
        "sample", "--n", "5", "--p", "0.5", "--q", "0.5", "--seed", "1", "--format", "csv",
    ]);
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn flux_profile_hits_exact_endpoints() {
    let text = ok_stdout(&["hydro", "flux", "--p", "0.9", "--q", "0.666666666666667", "--grid", "8"]);
    let rows = parse_profile(&text);
    assert_eq!(rows.len(), 9);
    assert_eq!(rows[0], (0.0, 0.0));
    assert_eq!(rows.last().unwrap().1, 1.0, "flux(1) must be exactly 1");
    assert!((rows[4].1 - 0.8).abs() < 1e-12, "flux(1/2; kappa=4) = 0.8");
}

#[test]
fn limit_hsigma_vanishes_below_the_lower_fan_edge() {
    // p = q = 0.5 gives kappa = 1.5; the profile at threshold x is 0 for
    // prefix y <= x / kappa = 1/3.
    let text = ok_stdout(&[
        "hydro", "limit-Hsigma", "--p", "0.5", "--q", "0.5", "--x", "0.5", "--grid", "30",
    ]);
    let rows = parse_profile(&text);
    for &(y, value) in &rows {
        if y <= 1.0 / 3.0 {
            assert_eq!(value, 0.0, "nonzero below the fan at y = {y}");
        }
        assert!((0.0..=1.0).contains(&value));
    }
    let top = rows.last().unwrap();
    assert!((top.1 - 0.5).abs() < 1e-12, "H(1, x) = 1 - x");
}

#[test]
fn shock_curve_profile_is_continuous() {
    let text = ok_stdout(&[
        "hydro", "shock-curve", "--p", "0.9", "--q", "0.666666666666667", "--lambda", "0.25",
        "--grid", "200",
    ]);
    let rows = parse_profile(&text);
    assert_eq!(rows.len(), 201);
    for pair in rows.windows(2) {
        let jump = (pair[1].1 - pair[0].1).abs();
        assert!(jump < 0.05, "jump {jump} between v = {} and {}", pair[0].0, pair[1].0);
    }
}

#[test]
fn pde_profile_conserves_mass() {
    let text = ok_stdout(&[
        "pde", "--cells", "400", "--lambda", "0.25", "--p", "0.9", "--q", "0.666666666666667",
    ]);
    let rows = parse_profile(&text);
    assert_eq!(rows.len(), 400);
    let mass: f64 = rows.iter().map(|&(_, v)| v / 400.0).sum();
    assert!((mass - 0.5).abs() < 1e-9, "mass {mass} drifted from 2 lambda");
}

#[test]
fn file_outputs_land_in_the_out_directory() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();

    ok_stdout(&["sample", "--n", "8", "--p", "0.5", "--q", "0.5", "--seed", "3", "--out", out]);
    assert!(dir.path().join("perms.txt").is_file());

    ok_stdout(&["exact", "--n", "4", "--p", "0.3", "--q", "0.7", "--out", out]);
    assert!(dir.path().join("law.json").is_file());

    ok_stdout(&[
        "hydro", "gshock", "--p", "0.9", "--q", "0.666666666666667", "--lambda", "0.2", "--out",
        out, "--format", "svg",
    ]);
    assert!(dir.path().join("profile.csv").is_file());
    let svg = fs::read_to_string(dir.path().join("profile.svg")).unwrap();
    assert!(svg.starts_with("<svg"), "profile.svg is not an svg");
}

#[test]
fn sample_csv_dumps_one_config_per_draw() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    ok_stdout(&[
        "sample", "--n", "6", "--p", "0.5", "--q", "0.5", "--seed", "9", "--samples", "3",
        "--out", out, "--format", "csv",
    ]);
    for s in 0..3 {
        let path = dir.path().join(format!("config_{s}.csv"));
        let text = fs::read_to_string(&path).unwrap_or_else(|_| panic!("{path:?} missing"));
        assert!(text.starts_with("S,Y,top_color,right_color"));
        // One row per box of the staircase: s = 2..=n, y = 1..s.
        assert_eq!(text.lines().count() - 1, 6 * 5 / 2);
    }
}

fn write_spec(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn malformed_spec_names_the_offending_key() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(
        dir.path(),
        "bad.json",
        r#"{"kind": "triangleLimit", "n": 50, "bogus": 1}"#,
    );
    let out = qdem(&["experiment", &spec, "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(exit_code(&out), 2);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("bogus"), "unknown key not named: {err}");
}

#[test]
fn spec_missing_a_required_field_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), "noseed.json", r#"{"kind": "triangleLimit", "n": 50, "p": 0.5, "q": 0.5, "samples": 2}"#);
    let out = qdem(&["experiment", &spec, "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(exit_code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("seed"));
}

#[test]
fn experiment_results_are_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(
        dir.path(),
        "tri.json",
        r#"{"kind": "triangleLimit", "n": 120, "p": 0.5, "q": 0.5, "samples": 16, "seed": 5, "grid": 9}"#,
    );
    let run = |threads: &str, sub: &str| {
        let out_dir = dir.path().join(sub);
        ok_stdout(&[
            "--threads", threads, "experiment", &spec, "--out", out_dir.to_str().unwrap(),
        ]);
        (
            fs::read_to_string(out_dir.join("summary.json")).unwrap(),
            fs::read_to_string(out_dir.join("per_point.csv")).unwrap(),
        )
    };
    assert_eq!(run("1", "a"), run("3", "b"), "thread count changed the results");
}

#[test]
fn coupling_order_writes_report_and_trajectories() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(
        dir.path(),
        "co.json",
        r#"{"kind": "couplingOrder", "n": 30, "p": 0.5, "q": 0.5, "x": 0.5, "samples": 40, "seed": 11}"#,
    );
    let out_dir = dir.path().join("co");
    let line = ok_stdout(&["experiment", &spec, "--out", out_dir.to_str().unwrap()]);
    assert!(line.contains("violations="), "summary line: {line}");

    let report: Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("summary.json")).unwrap()).unwrap();
    let points = report["points"].as_array().expect("per-point array");
    assert_eq!(points.len(), 16 * 45, "(X+1) x m grid");
    for key in ["V", "U", "refl", "act", "dstep", "quad", "ci"] {
        assert!(points[0].get(key).is_some(), "point missing {key}");
    }

    let traj = fs::read_to_string(out_dir.join("trajectory.csv")).unwrap();
    assert!(traj.starts_with("system,V,U,occupied"));
    for system in ["refl", "dstep", "quad"] {
        assert!(traj.lines().any(|l| l.starts_with(system)), "{system} rows missing");
    }
}

#[test]
fn strict_mode_exits_3_on_a_threshold_breach() {
    // At n = 40 the quadrant boundary layer far exceeds the strict
    // thresholds, so this must fail loudly rather than pass quietly.
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(
        dir.path(),
        "quad.json",
        r#"{"kind": "quadrantHydro", "n": 40, "p": 0.9, "q": 0.666666666666667, "samples": 10, "seed": 2, "grid": 9}"#,
    );
    let out_dir = dir.path().join("q");
    let out = qdem(&["experiment", &spec, "--out", out_dir.to_str().unwrap(), "--strict"]);
    assert_eq!(exit_code(&out), 3);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("quadrantHydro over threshold"), "stderr: {err}");
    // Artifacts are still written before the strict verdict.
    assert!(out_dir.join("summary.json").is_file());
}

#[test]
fn experiment_summary_points_at_the_per_point_table() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(
        dir.path(),
        "cyl.json",
        r#"{"kind": "cylinderHydro", "n": 200, "p": 0.9, "q": 0.666666666666667, "lambda": 0.25, "samples": 4, "seed": 1, "grid": 10}"#,
    );
    let out_dir = dir.path().join("c");
    ok_stdout(&["experiment", &spec, "--out", out_dir.to_str().unwrap()]);
    let summary: Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["per_point_csv"], "per_point.csv");
    assert!((summary["kappa"].as_f64().unwrap() - 4.0).abs() < 1e-9);
    let table = fs::read_to_string(out_dir.join("per_point.csv")).unwrap();
    assert!(table.starts_with("u_lo,u_hi,v_lo,v_hi,empirical,exact,godunov"));
    assert_eq!(table.lines().count() - 1, 100);
}
