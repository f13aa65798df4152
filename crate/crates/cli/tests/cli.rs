//! Black-box tests against the built binary: output contracts, exit codes,
//! and byte-level reproducibility.

use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_basinbound")).args(args).output().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("process should exit normally")
}

#[test]
fn classify_reports_the_attractor_fate() {
    let out = run(&["--henon", "0.1", "2", "classify", "--point", "0.5", "0.1"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let line = stdout(&out);
    assert!(line.starts_with("fate=ToAlpha iters="), "{line}");
    assert!(line.contains(" witness="), "{line}");
}

#[test]
fn classify_on_the_saddle_is_immediate() {
    let out = run(&["--henon", "0.1", "2", "classify", "--point", "0", "0"]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out), "fate=ToOrigin iters=0 witness=none\n");
}

#[test]
fn classify_lists_regions_on_request() {
    let out =
        run(&["--henon", "0.1", "2", "classify", "--point", "-0.3", "5", "--regions"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.lines().any(|l| l == "regions=WDelta"), "{text}");
}

#[test]
fn classify_rejects_a_degenerate_coupling() {
    let out = run(&["--henon", "0", "2", "classify", "--point", "1", "1"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("delta = 0"), "{}", stderr(&out));
}

#[test]
fn missing_flag_values_exit_two() {
    let out = run(&["--henon", "0.1", "2", "classify", "--point", "0.5"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn bare_invocation_without_a_command_exits_two() {
    let out = run(&[]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("missing command"), "{}", stderr(&out));
}

#[test]
fn basin_is_byte_identical_across_runs_and_worker_counts() {
    let dir = tempfile::tempdir().unwrap();
    let stem = |name: &str| dir.path().join(name).to_string_lossy().into_owned();
    for (name, workers) in [("a", "1"), ("b", "1"), ("c", "3")] {
        let out = run(&[
            "--henon", "0.1", "2", "--grid", "60", "50", "--workers", workers, "basin",
            "--out", &stem(name),
        ]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
    }
    let read = |name: &str, suffix: &str| {
        std::fs::read(dir.path().join(format!("{name}{suffix}"))).unwrap()
    };
    let ppm = read("a", ".ppm");
    assert!(ppm.starts_with(b"P6\n60 50\n255\n"));
    assert_eq!(ppm.len(), b"P6\n60 50\n255\n".len() + 3 * 60 * 50);
    assert_eq!(ppm, read("b", ".ppm"));
    assert_eq!(ppm, read("c", ".ppm"));
    let csv = read("a", "_boundary.csv");
    assert!(csv.starts_with(b"x,y\n"));
    assert_eq!(csv, read("b", "_boundary.csv"));
    assert_eq!(csv, read("c", "_boundary.csv"));
}

#[test]
fn manifold_writes_an_arclength_parameterized_curve() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ws.csv");
    let out = run(&[
        "--henon", "0.1", "2", "manifold", "--kind", "stable", "--branch", "plus",
        "--target", "2", "--out", path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("s,x,y"));
    let first = lines.next().unwrap();
    assert!(first.starts_with("0.0000000000000000e0,"), "{first}");
    assert!(text.lines().count() > 50);
}

#[test]
fn manifold_requires_a_saddle_at_the_origin() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("never.csv");
    // mu < 1 - delta^2 makes the origin attracting.
    let out = run(&[
        "--henon", "0.1", "0.5", "manifold", "--kind", "stable", "--branch", "plus",
        "--out", path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 3, "{}", stderr(&out));
    assert!(!path.exists());
}

#[test]
fn verify_writes_a_report_and_exits_zero_when_all_pass() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let out = run(&[
        "--henon", "0.1", "2", "verify", "--checks",
        "flip_saddle_origin,eigen_thresholds_origin", "--samples", "50",
        "--out", path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let parsed: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let reports = parsed.as_array().unwrap();
    assert_eq!(reports.len(), 2);
    for r in reports {
        assert_eq!(r["verdict"], "pass", "{r}");
    }
}

#[test]
fn verify_exits_one_when_a_check_fails() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    // mu above 3(1 - delta^2): the interior fixed point is no longer attracting.
    let out = run(&[
        "--henon", "0.2", "2.9", "verify", "--checks", "alpha_attracting_threshold",
        "--samples", "30", "--out", path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 1, "{}", stderr(&out));
    assert!(path.exists());
}

#[test]
fn verify_rejects_an_unknown_check_id() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let out = run(&[
        "--henon", "0.1", "2", "verify", "--checks", "no_such_check",
        "--out", path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 2);
}

#[test]
fn sweep_rejects_mu_outside_the_open_interval() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.csv");
    let out = run(&["sweep", "--mu", "0.5", "--deltas", "0.1", "--out", path.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("outside"), "{}", stderr(&out));
}

#[test]
fn sweep_with_no_deltas_writes_only_the_header() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.csv");
    let out = run(&["sweep", "--mu", "2", "--out", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(std::fs::read_to_string(&path).unwrap(), "mu,delta_star\n");
}

#[test]
fn sweep_reports_the_largest_passing_delta() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.csv");
    let out = run(&[
        "sweep", "--mu", "2", "--deltas", "0.05,0.1,0.2,0.4", "--samples", "40",
        "--out", path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = std::fs::read_to_string(&path).unwrap();
    let row = text.lines().nth(1).unwrap();
    let (mu, star) = row.split_once(',').unwrap();
    assert_eq!(mu.parse::<f64>().unwrap(), 2.0);
    assert_eq!(star.parse::<f64>().unwrap(), 0.4);
}

#[test]
fn print_config_round_trips_byte_identically() {
    let dir = tempfile::tempdir().unwrap();
    let first = run(&["--henon", "0.3", "1.7", "--seed", "11", "--max-iter", "5000",
        "--print-config"]);
    assert_eq!(code(&first), 0);
    let cfg_path = dir.path().join("run.cfg");
    std::fs::write(&cfg_path, &first.stdout).unwrap();
    let second = run(&["--config", cfg_path.to_str().unwrap(), "--print-config"]);
    assert_eq!(code(&second), 0, "{}", stderr(&second));
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("run.cfg");
    std::fs::write(&cfg_path, "map = henon 0.3 1.7\nseed = 11\n").unwrap();
    let out = run(&[
        "--config", cfg_path.to_str().unwrap(), "--seed", "99", "--print-config",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("seed = 99"), "{text}");
    assert!(text.contains("map = henon 2.9999999999999999e-1"), "{text}");
}

#[test]
fn config_file_with_an_unknown_key_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("run.cfg");
    std::fs::write(&cfg_path, "colour = blue\n").unwrap();
    let out = run(&["--config", cfg_path.to_str().unwrap(), "--print-config"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("unknown key"), "{}", stderr(&out));
}

#[test]
fn general_family_runs_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let out = run(&[
        "--general", "logistic(2)", "linear_plus_sine(0.1, 0.001)", "0.1",
        "verify", "--checks", "general_hypotheses", "--samples", "60",
        "--out", path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let cls = run(&[
        "--general", "logistic(2)", "linear_plus_sine(0.1, 0.001)", "0.1",
        "classify", "--point", "0.5", "0.05",
    ]);
    assert_eq!(code(&cls), 0, "{}", stderr(&cls));
    assert!(stdout(&cls).starts_with("fate=ToAlpha"), "{}", stdout(&cls));
}

#[test]
fn long_help_enumerates_the_check_catalog() {
    let out = run(&["--help"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    for id in ["lemma4_wdelta_backward_escape", "lemma21_k_characterization", "general_hypotheses"]
    {
        assert!(text.contains(id), "help is missing {id}");
    }
}

#[test]
fn outputs_land_where_the_config_file_points() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("curve.csv");
    let cfg_path = dir.path().join("run.cfg");
    std::fs::write(
        &cfg_path,
        format!("map = henon 0.1 2\nout = {}\n", target.display()),
    )
    .unwrap();
    let out = run(&[
        "--config", cfg_path.to_str().unwrap(), "manifold", "--kind", "unstable",
        "--branch", "plus", "--target", "0.5",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(std::fs::read_to_string(&target).unwrap().starts_with("s,x,y\n"));
}
