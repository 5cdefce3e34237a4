use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_groundstate"));
    c.env_remove("GS_RESULTS_DIR");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("JSON on stdout")
}

#[test]
fn solve_f_reports_convergence() {
    let out = run(&["solve-f", "--space", "euclidean", "--n", "2", "--p", "3", "--lambda", "1", "--beta", "1"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["converged"], true);
    assert_eq!(v["problem"], "f_lambda");
    assert!(v["residual"].as_f64().unwrap() < 1e-6);
}

#[test]
fn identical_arguments_give_identical_bytes() {
    let args = ["second-variation", "--n", "1", "--directions", "3", "--seed", "9", "--grid-m", "1500", "--rmax", "30"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let c = run(&["second-variation", "--n", "1", "--directions", "3", "--seed", "10", "--grid-m", "1500", "--rmax", "30"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["solve-f", "--bogus"]).status.code(), Some(2));
    assert_eq!(run(&["solve-f", "--n", "3", "--p", "7"]).status.code(), Some(2));
    assert_eq!(run(&["solve-f", "--space", "moon"]).status.code(), Some(2));
    // A residual target below rounding cannot be met.
    let out = run(&["solve-f", "--n", "2", "--grid-m", "200", "--tol", "1e-30"]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(json(&out)["converged"], false);
    assert_eq!(run(&["help"]).status.code(), Some(0));
}

#[test]
fn results_directory_and_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "[solver]\nm = 1500\n\n[problem]\nn = 2\np = 3.0\n").unwrap();
    let out = bin()
        .args(["solve-f", "--config", cfg.to_str().unwrap(), "--lambda", "2"])
        .env("GS_RESULTS_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out.stdout.is_empty());
    let mut names: Vec<String> = std::fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n.starts_with("solve-f-"))
        .collect();
    names.sort();
    assert_eq!(names.len(), 2, "{names:?}");
    assert!(names[0].ends_with(".json") || names[1].ends_with(".json"));
    let report = names.iter().find(|n| n.ends_with(".json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join(report)).unwrap()).unwrap();
    assert_eq!(v["minimizer"]["grid"]["m"], 1500);
    assert_eq!(v["params"]["lambda"], 2.0);
    assert_eq!(v["params"]["n"], 2);
    let csv = names.iter().find(|n| n.ends_with("-profile.csv")).unwrap();
    let text = std::fs::read_to_string(dir.path().join(csv)).unwrap();
    assert_eq!(text.lines().count(), 1501);
}

#[test]
fn json_config_and_explicit_report_path() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"annulus": {"outer": 10.0}}"#).unwrap();
    let report = dir.path().join("sub").join("ann.json");
    let out = run(&["annulus-demo", "--config", cfg.to_str().unwrap(), "--out", report.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v["config"]["outer"], 10.0);
    assert!(v["l1_upper"].as_f64().unwrap() < v["l2_radial"].as_f64().unwrap());
}

fn write_clouds(path: &Path) {
    // Half the mass at the origin, half running away along the x axis.
    let mut s = String::from("k,x,y,mass\n");
    for k in 1..=10 {
        s.push_str(&format!("{k},0,0,0.5\n{k},{},0,0.5\n", 4 * k));
    }
    std::fs::write(path, s).unwrap();
}

#[test]
fn cc_classify_from_csv() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("clouds.csv");
    write_clouds(&input);
    let out = run(&["cc-classify", "--input", input.to_str().unwrap(), "--radii", "0.5,1,2,4,8"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["label"], "Splitting");
    assert!((v["alpha"].as_f64().unwrap() - 0.5).abs() < 0.02);
    let missing = run(&["cc-classify", "--input", dir.path().join("nope.csv").to_str().unwrap()]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn hyperbolic_energy_defaults() {
    let v = json(&run(&["hyperbolic-energy"]));
    assert_eq!(v["positive"], true);
    assert!(v["identity_rel_err"].as_f64().unwrap() < 1e-6);
    assert!(v["zero_multiplier"]["gradient_rel_err"].as_f64().unwrap() < 1e-4);
    assert_eq!(run(&["hyperbolic-energy", "--lambda", "0.5"]).status.code(), Some(2));
}

#[test]
fn verify_all_quick_passes() {
    let out = run(&["verify-all", "--quick", "--jobs", "4"]);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert_eq!(out.status.code(), Some(0), "{stderr}");
    assert_eq!(stderr.lines().filter(|l| l.starts_with("[PASS]")).count(), 13);
    assert_eq!(json(&out)["all_passed"], true);
}
