use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn flgame(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_flgame"))
        .args(args)
        .arg("--out-dir")
        .arg(out)
        .env_remove("FLGAME_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn write_spec(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path
}

#[test]
fn thresholds_of_symmetric_game() {
    let out = tempfile::tempdir().unwrap();
    let spec = data("sym3.json");
    let res = flgame(&["thresholds", "--spec", spec.to_str().unwrap()], out.path());
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let report = json(&out.path().join("thresholds.json"));
    assert!((report["lambda_star"].as_f64().unwrap() - 1.5).abs() < 1e-9);
    assert!((report["c1"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    assert!((report["c2"].as_f64().unwrap() - 5.0).abs() < 1e-9);
    let stdout = String::from_utf8_lossy(&res.stdout);
    assert!(stdout.contains("lambda_star"));
}

#[test]
fn solve_past_saturation_returns_upper_bounds() {
    let out = tempfile::tempdir().unwrap();
    let spec = write_spec(
        out.path(),
        "saturated.json",
        r#"{"m": 3, "T": 1, "lambda": 2.0, "alpha": [1, 1, 1], "mode": "homogeneous",
            "q": [1, 1, 1], "Q": [5, 6, 7]}"#,
    );
    let res = flgame(&["solve", "--spec", spec.to_str().unwrap(), "--init", "Q"], out.path());
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let report = json(&out.path().join("solve.json"));
    let profile: Vec<Vec<f64>> = serde_json::from_value(report["profile"].clone()).unwrap();
    assert_eq!(profile, vec![vec![5.0], vec![6.0], vec![7.0]]);
    assert!(report["eps"].as_f64().unwrap() <= 1e-8);

    let trace = fs::read_to_string(out.path().join("trace.csv")).unwrap();
    let mut lines = trace.lines();
    assert_eq!(lines.next(), Some("iter,potential,step_norm,eps_gap"));
    assert!(lines.next().unwrap().starts_with("0,"));
}

#[test]
fn solve_accepts_a_profile_file() {
    let out = tempfile::tempdir().unwrap();
    let init = write_spec(out.path(), "init.json", "[3.0, 2.0, 4.0]");
    let spec = data("sym3.json");
    let res = flgame(
        &["solve", "--spec", spec.to_str().unwrap(), "--init", init.to_str().unwrap()],
        out.path(),
    );
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let report = json(&out.path().join("solve.json"));
    let s_bar = report["average_effort"].as_f64().unwrap();
    assert!((s_bar - 1.0).abs() < 1e-8);
}

#[test]
fn missing_spec_is_a_validation_error() {
    let out = tempfile::tempdir().unwrap();
    let missing = out.path().join("does_not_exist.json");
    let res = flgame(&["thresholds", "--spec", missing.to_str().unwrap()], out.path());
    assert_eq!(res.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&res.stderr).contains(missing.to_str().unwrap()));
}

#[test]
fn malformed_spec_names_the_field() {
    let out = tempfile::tempdir().unwrap();
    let spec = write_spec(
        out.path(),
        "bad.json",
        r#"{"m": 2, "T": 1, "lambda": 1, "alpha": [1, -2], "mode": "homogeneous", "q": [0, 0], "Q": [1, 1]}"#,
    );
    let res = flgame(&["equilibria", "--spec", spec.to_str().unwrap()], out.path());
    assert_eq!(res.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&res.stderr).contains("alpha"));
}

#[test]
fn usage_errors_exit_with_one_and_help_with_zero() {
    let out = tempfile::tempdir().unwrap();
    assert_eq!(flgame(&["frobnicate"], out.path()).status.code(), Some(1));
    assert_eq!(flgame(&["sweep", "--bogus"], out.path()).status.code(), Some(1));
    assert_eq!(flgame(&["sweep", "--help"], out.path()).status.code(), Some(0));
}

#[test]
fn nonconcave_budget_game_is_a_numerical_failure() {
    let out = tempfile::tempdir().unwrap();
    let spec = write_spec(
        out.path(),
        "nonconcave.json",
        r#"{"m": 2, "T": 2, "lambda": 5, "alpha": [1, 1], "mode": "heterogeneous", "b": [0, 0], "B": [4, 4]}"#,
    );
    let res = flgame(&["solve", "--spec", spec.to_str().unwrap()], out.path());
    assert_eq!(res.status.code(), Some(2));
}

#[test]
fn sweep_writes_csv_and_sidecar() {
    let out = tempfile::tempdir().unwrap();
    let spec = data("sym3.json");
    let res = flgame(
        &[
            "sweep",
            "--spec",
            spec.to_str().unwrap(),
            "--lambda-min",
            "0.5",
            "--lambda-max",
            "2.5",
            "--points",
            "41",
        ],
        out.path(),
    );
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let csv = fs::read_to_string(out.path().join("sweep.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "lambda,s_bar,region,iterations,eps,discrepancy");
    assert_eq!(lines.len(), 42);
    assert!(lines[1].starts_with("0.5,1.0,below_activation,"));
    let sidecar = json(&out.path().join("sweep_thresholds.json"));
    assert!((sidecar["analytic"]["lambda_star"].as_f64().unwrap() - 1.5).abs() < 1e-9);
    assert!(sidecar["empirical"]["has_jump"].as_bool().unwrap());
}

#[test]
fn identical_invocations_give_identical_csv() {
    let spec = data("scenario1_m8.json");
    let spec = spec.to_str().unwrap();
    let run = || {
        let out = tempfile::tempdir().unwrap();
        let sweep = flgame(
            &["sweep", "--spec", spec, "--lambda-min", "1", "--lambda-max", "4.5", "--points", "60"],
            out.path(),
        );
        assert!(sweep.status.success());
        let fl = flgame(
            &[
                "fl-sim",
                "--spec",
                spec,
                "--lambdas",
                "1.9,2.6,2.7,3.8",
                "--seed",
                "11",
                "--rounds",
                "3",
                "--samples-per-client",
                "40",
            ],
            out.path(),
        );
        assert!(fl.status.success(), "{}", String::from_utf8_lossy(&fl.stderr));
        let mut files = vec![fs::read(out.path().join("sweep.csv")).unwrap()];
        for k in 1..=4 {
            files.push(fs::read(out.path().join(format!("fl_case{k}.csv"))).unwrap());
        }
        files
    };
    assert_eq!(run(), run());
}

#[test]
fn fl_sim_summary_lists_every_case() {
    let out = tempfile::tempdir().unwrap();
    let spec = data("scenario1_m8.json");
    let res = flgame(
        &["fl-sim", "--spec", spec.to_str().unwrap(), "--rounds", "2", "--samples-per-client", "30"],
        out.path(),
    );
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let summary = json(&out.path().join("fl_summary.json"));
    let cases = summary["cases"].as_array().unwrap();
    assert_eq!(cases.len(), 4);
    assert_eq!(cases[0]["average_effort"].as_f64(), Some(1.0));
    let csv = fs::read_to_string(out.path().join("fl_case1.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("round,loss,accuracy"));
    assert_eq!(csv.lines().count(), 3);
}

#[test]
fn out_dir_defaults_to_environment_variable() {
    let out = tempfile::tempdir().unwrap();
    let spec = data("two_player.json");
    let res = Command::new(env!("CARGO_BIN_EXE_flgame"))
        .args(["thresholds", "--spec", spec.to_str().unwrap()])
        .env("FLGAME_OUT_DIR", out.path())
        .output()
        .unwrap();
    assert!(res.status.success());
    let report = json(&out.path().join("thresholds.json"));
    assert!((report["lambda_star"].as_f64().unwrap() - 1.690599).abs() < 1e-6);
}
