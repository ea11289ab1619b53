use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

fn run(dir: &Path, args: &[&str], config: &Value) -> Output {
    let cfg = dir.join(format!(
        "config-{}.json",
        args.join("_").replace(['/', '-'], "")
    ));
    fs::write(&cfg, config.to_string()).unwrap();
    Command::new(env!("CARGO_BIN_EXE_critset"))
        .args(args)
        .arg("--config")
        .arg(&cfg)
        .output()
        .unwrap()
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

fn softplus() -> Value {
    json!({"family": "softplus", "a": -12.0, "b": 3.0})
}

#[test]
fn argument_of_the_zero_potential() {
    let dir = TempDir::new().unwrap();
    let out_dir = dir.path().join("out");
    let out = run(
        dir.path(),
        &["argument", "--output", out_dir.to_str().unwrap()],
        &json!({"nonlinearity": {"family": "linear", "c": 0.0}}),
    );
    assert_eq!(out.status.code(), Some(0));
    let s = stdout_json(&out);
    assert!((s["W_pi"].as_f64().unwrap() - 1.2626273).abs() < 1e-7);
    assert_eq!(s["is_critical"], false);
    let csv = fs::read_to_string(out_dir.join("path.csv")).unwrap();
    assert!(csv.starts_with("t,W,rho\n"));
    assert_eq!(csv.lines().count(), 2050);
    assert!(!csv.contains('\r'));
    assert_eq!(fs::read(out_dir.join("summary.json")).unwrap(), out.stdout);
}

#[test]
fn chart_point_round_trips_into_argument() {
    let dir = TempDir::new().unwrap();
    let crit = run(
        dir.path(),
        &["critical"],
        &json!({"nonlinearity": softplus(), "k": 2}),
    );
    assert_eq!(crit.status.code(), Some(0));
    let point = stdout_json(&crit);
    assert_eq!(point["k"], 2);
    assert!(point["residual"].as_f64().unwrap() <= 1e-8);
    assert!(point["transversality"].as_f64().unwrap() < 0.0);
    let arg = run(
        dir.path(),
        &["argument"],
        &json!({"nonlinearity": softplus(), "inputs": {"u": point["u"]}}),
    );
    assert_eq!(arg.status.code(), Some(0));
    let s = stdout_json(&arg);
    assert_eq!(s["is_critical"], true);
    assert_eq!(s["k"], 2);
}

#[test]
fn node_valued_inputs_round_trip() {
    let dir = TempDir::new().unwrap();
    let n = 64;
    let values: Vec<f64> = (0..=n)
        .map(|i| (i as f64 * std::f64::consts::PI / n as f64).sin() * 3.0)
        .collect();
    let h = json!({"type": "nodes", "n": n, "values": values});
    let cfg = json!({"nonlinearity": softplus(), "grid": {"n": n, "substeps": 4}, "inputs": {"h": h}, "k": 1});
    let crit = run(dir.path(), &["critical"], &cfg);
    assert_eq!(
        crit.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&crit.stderr)
    );
    let point = stdout_json(&crit);
    assert_eq!(point["u"]["type"], "nodes");
    let arg = run(
        dir.path(),
        &["argument"],
        &json!({"nonlinearity": softplus(), "grid": {"n": n, "substeps": 4}, "inputs": {"u": point["u"]}}),
    );
    assert_eq!(stdout_json(&arg)["k"], 1);
}

#[test]
fn output_is_byte_identical_across_runs_and_thread_counts() {
    let dir = TempDir::new().unwrap();
    let cfg =
        json!({"nonlinearity": softplus(), "lambda": {"min": -20.0, "max": 20.0, "samples": 41}});
    let mut outputs = Vec::new();
    for threads in ["1", "3", "1"] {
        let out_dir = dir.path().join(format!("o{}", outputs.len()));
        let out = run(
            dir.path(),
            &[
                "scan",
                "--threads",
                threads,
                "--output",
                out_dir.to_str().unwrap(),
            ],
            &cfg,
        );
        assert_eq!(out.status.code(), Some(0));
        outputs.push((
            out.stdout,
            fs::read(out_dir.join("lambda_scan.csv")).unwrap(),
        ));
    }
    assert!(outputs.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn input_errors_exit_with_two() {
    let dir = TempDir::new().unwrap();
    let out = run(
        dir.path(),
        &["argument"],
        &json!({"nonlinearity": softplus(), "lamda": 1}),
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("lamda"));

    let bad = dir.path().join("broken.json");
    fs::write(&bad, "{\"nonlinearity\": ").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_critset"))
        .args(["argument", "--config"])
        .arg(&bad)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));

    let out = run(
        dir.path(),
        &["critical"],
        &json!({"nonlinearity": {"family": "linear", "c": -1.0}, "k": 1}),
    );
    assert_eq!(out.status.code(), Some(2));

    let out = run(
        dir.path(),
        &["scan"],
        &json!({"nonlinearity": softplus(), "omega": {"min": 1.0, "max": 1.0, "samples": 5}}),
    );
    assert_eq!(out.status.code(), Some(2));

    let out = run(
        dir.path(),
        &["argument"],
        &json!({"nonlinearity": {"family": "softplus", "a": 1.0, "b": 1.0}}),
    );
    assert_eq!(out.status.code(), Some(2));

    let u = json!({"type": "nodes", "n": 16, "values": vec![1.0; 17]});
    let out = run(
        dir.path(),
        &["argument"],
        &json!({"nonlinearity": softplus(), "grid": {"n": 16}, "inputs": {"u": u}}),
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn empty_component_is_reported_not_failed() {
    let dir = TempDir::new().unwrap();
    let out = run(
        dir.path(),
        &["critical"],
        &json!({"nonlinearity": softplus(), "k": 4}),
    );
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout_json(&out)["nonempty"], false);
}

#[test]
fn omega_scan_hits_multiples_of_pi() {
    let dir = TempDir::new().unwrap();
    let out_dir = dir.path().join("o");
    let cfg =
        json!({"omega": {"min": 0.0, "max": 9.0, "samples": 10}, "output": {"format": "csv"}});
    let out = run(
        dir.path(),
        &["scan", "--output", out_dir.to_str().unwrap()],
        &cfg,
    );
    assert_eq!(out.status.code(), Some(0));
    let csv = String::from_utf8(out.stdout).unwrap();
    assert!(csv.starts_with("omega,W_pi\n"));
    let rows: Vec<(f64, f64)> = csv
        .lines()
        .skip(1)
        .map(|l| {
            let (a, b) = l.split_once(',').unwrap();
            (a.parse().unwrap(), b.parse().unwrap())
        })
        .collect();
    for (omega, k) in [(1.0, 1.0), (4.0, 2.0), (9.0, 3.0)] {
        let w = rows.iter().find(|r| r.0 == omega).unwrap().1;
        assert!((w - k * std::f64::consts::PI).abs() < 1e-12);
    }
}

#[test]
fn verify_groups_and_coarse_grids() {
    let dir = TempDir::new().unwrap();
    let out = run(dir.path(), &["verify", "--only", "dw-formula"], &json!({}));
    assert_eq!(out.status.code(), Some(0));
    let table = String::from_utf8(out.stdout).unwrap();
    assert!(table
        .lines()
        .filter(|l| l.starts_with("PASS") || l.starts_with("FAIL"))
        .all(|l| l.contains("dw-formula:")));

    let out = run(
        dir.path(),
        &["verify", "--only", "oracle"],
        &json!({"grid": {"n": 64}}),
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stdout).unwrap().contains("FAIL"));

    let out = run(dir.path(), &["verify", "--only", "nonsense"], &json!({}));
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn count_writes_solutions_and_scan() {
    let dir = TempDir::new().unwrap();
    let out_dir = dir.path().join("o");
    let cfg = json!({"nonlinearity": {"family": "linear", "c": 1.0}, "inputs": {"g": {"type": "sine", "coeffs": [1.0]}}});
    let out = run(
        dir.path(),
        &["count", "--output", out_dir.to_str().unwrap()],
        &cfg,
    );
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout_json(&out)["count"], 1);
    let sols: Value =
        serde_json::from_slice(&fs::read(out_dir.join("solutions.json")).unwrap()).unwrap();
    assert!((sols[0]["s"].as_f64().unwrap() - 0.5).abs() < 1e-8);
    assert_eq!(sols[0]["zeros_of_u"], 0);
    let csv = fs::read_to_string(out_dir.join("shooting_scan.csv")).unwrap();
    assert!(csv.starts_with("s,u_pi,blew_up\n"));

    let cfg = json!({"nonlinearity": {"family": "quadratic", "c": 1.0}, "inputs": {"g": {"type": "sine", "coeffs": []}}});
    let out = run(dir.path(), &["count"], &cfg);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout_json(&out)["blow_ups"].as_u64().unwrap() > 0);
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));

    let out = run(
        dir.path(),
        &["count"],
        &json!({"nonlinearity": {"family": "linear", "c": 1.0}}),
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn fold_family_has_zero_and_two_solutions_at_the_ends() {
    let dir = TempDir::new().unwrap();
    let counts: Vec<u64> = [-40.0, 40.0]
        .iter()
        .map(|tau| {
            let cfg = json!({"nonlinearity": {"family": "softplus", "a": -2.0, "b": 0.0}, "inputs": {"g": {"type": "sine", "coeffs": [tau]}}});
            stdout_json(&run(dir.path(), &["count"], &cfg))["count"].as_u64().unwrap()
        })
        .collect();
    let mut sorted = counts.clone();
    sorted.sort();
    assert_eq!(sorted, [0, 2]);
}
