use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

fn qssep(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qssep"))
        .args(args)
        .env_remove("QSSEP_CACHE_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn json(args: &[&str]) -> Value {
    let mut all = args.to_vec();
    all.push("--json");
    let o = qssep(&all);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).expect("valid json")
}

#[test]
fn loop_eval_prints_the_factored_polynomial() {
    let o = qssep(&["loop-eval", "--cycle", "(1 2 3)"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().next(), Some("x1*(1 - 2*x2)*(1 - x3)"));
    assert!(stdout(&o).contains("# manifest {"));
}

#[test]
fn loop_eval_json_round_trips() {
    let v = json(&["loop-eval", "--cycle", "(1 3 2 4)", "--at", "0.2,0.4,0.6,0.8"]);
    let r = &v["result"];
    assert_eq!(r["degree"], 4);
    assert_eq!(r["factored"], "x1*(1 - 4*x2 - x3 + 5*x2*x3)*(1 - x4)");
    let poly: qssep_core::MultilinearPoly = serde_json::from_value(r["poly"].clone()).unwrap();
    let want = 0.2 * (1.0 - 4.0 * 0.4 - 0.6 + 5.0 * 0.4 * 0.6) * (1.0 - 0.8);
    assert!((poly.eval_f64(&[0.2, 0.4, 0.6, 0.8]) - want).abs() < 1e-12);
    assert!((r["value"].as_f64().unwrap() - want).abs() < 1e-12);
    assert_eq!(v["manifest"]["subcommand"], "loop-eval");
    assert_eq!(v["manifest"]["flags"]["cycle"], "(1 3 2 4)");
}

#[test]
fn associahedron_matches_face_counts() {
    let o = qssep(&["associahedron", "--n", "5"]);
    assert_eq!(stdout(&o).lines().next(), Some("1 + 14t + 56t^2 + 84t^3 + 42t^4"));
    let v = json(&["associahedron", "--n", "3"]);
    assert_eq!(v["result"]["polynomial"], "1 + 5t + 5t^2");
}

#[test]
fn verify_small_sweep_passes() {
    let o = qssep(&["verify", "--pmax", "4"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let v = json(&["verify", "--pmax", "5", "--property", "moves,compat"]);
    assert_eq!(v["result"]["summary"]["failed"], 0);
    assert_eq!(v["result"]["by_property"].as_object().unwrap().len(), 2);
}

#[test]
fn series_reconstructs_a_transposition() {
    let v = json(&["series", "--profile", "(2 1)", "--q", "2", "--k", "4"]);
    assert_eq!(v["result"]["cycle"], "(1 3 2 4 5)");
    assert_eq!(
        v["result"]["reconstructed_text"],
        "x1*(1 - 6*x2 - x3 - 2*x4 + 9*x2*x3 + 10*x2*x4 + 2*x3*x4 - 14*x2*x3*x4)*(1 - x5)"
    );
    let regular = json(&["series", "--k", "2"]);
    assert_eq!(regular["result"]["reconstructed_text"], "x1*(1 - 2*x2)*(1 - x3)");
}

#[test]
fn series_rejects_a_short_truncation() {
    let o = qssep(&["series", "--profile", "(2 1)", "--q", "2", "--k", "4", "--order", "1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn compare_reconciles_solver_and_series() {
    let o = qssep(&["compare", "--cycle", "(1 4 2 5 3)"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let v = json(&["compare", "--cycle", "(1 3 4 2)"]);
    assert_eq!(v["result"]["pass"], true);
    assert!(v["result"]["checks"].as_array().unwrap().len() >= 8);
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(qssep(&["loop-eval", "--cycle", "(1 1 2)"]).status.code(), Some(2));
    assert_eq!(qssep(&["loop-eval", "--cycle", "(1 2)", "--at", "0.5"]).status.code(), Some(2));
    assert_eq!(qssep(&["verify", "--pmax", "3", "--property", "nope"]).status.code(), Some(2));
    assert_eq!(qssep(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(qssep(&["compare", "--cycle", "(1 2 3)", "--simulate"]).status.code(), Some(2));
}

#[test]
fn simulate_writes_csv_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(
        &cfg,
        r#"{"L": 4, "D": 1.0, "alpha0": 1.0, "beta0": 0.0, "alphaL": 0.0, "betaL": 1.0,
            "dt": 0.002, "t_max": 4.0, "n_traj": 8, "seed": 11}"#,
    )
    .unwrap();
    let out = dir.path().join("results.csv");
    let o = qssep(&[
        "--threads",
        "2",
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--pair",
        "1,3",
        "--variance",
        "2",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(&out).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("observable,indices,estimate,stderr,prediction,z_score"));
    assert_eq!(lines.count(), 5 + 1 + 1);
    let manifest: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("results.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 11);
    assert_eq!(manifest["threads"], 2);
    assert_eq!(manifest["inputs"][0], cfg.to_str().unwrap());

    // Same seed, same numbers.
    let again = dir.path().join("again.csv");
    qssep(&["simulate", "--config", cfg.to_str().unwrap(), "--out", again.to_str().unwrap(), "--pair", "1,3", "--variance", "2"]);
    assert_eq!(fs::read_to_string(&again).unwrap(), csv);
}

#[test]
fn unknown_config_fields_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"L": 4, "bogus": 1}"#).unwrap();
    let o = qssep(&["simulate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn cache_directory_is_populated() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_qssep"))
        .args(["loop-eval", "--cycle", "(1 3 2 4)", "--json"])
        .env("QSSEP_CACHE_DIR", dir.path())
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(fs::read_dir(dir.path()).unwrap().count() > 0);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["manifest"]["cache_dir"], dir.path().to_str().unwrap());
}
