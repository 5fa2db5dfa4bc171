use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fxsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fxsim")).args(args).output().unwrap()
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../scenarios")
        .join(name)
}

#[test]
fn defaults_print_a_loadable_scenario() {
    let text = stdout(&fxsim(&["defaults"]));
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.toml");
    std::fs::write(&path, &text).unwrap();
    let cfg = fxsim::sim::load_scenario(&path).unwrap();
    assert_eq!(cfg, fxsim::sim::ScenarioConfig::default());
}

#[test]
fn ik_prints_four_angles_and_rejects_far_targets() {
    let text = stdout(&fxsim(&["ik", "1500", "0", "500", "30"]));
    let angles: Vec<(&str, f64)> = text
        .lines()
        .map(|l| {
            let (name, value) = l.split_once(' ').unwrap();
            (name, value.parse().unwrap())
        })
        .collect();
    assert_eq!(angles.len(), 4);
    assert_eq!(angles[0].0, "theta1");
    assert!(angles[0].1.abs() < 1e-9);

    let out = fxsim(&["ik", "9000", "0", "0", "0"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
}

#[test]
fn workspace_reports_the_radii() {
    let v: serde_json::Value = serde_json::from_str(&stdout(&fxsim(&["workspace"]))).unwrap();
    let rmin = v["r_min"].as_f64().unwrap();
    let rmax = v["r_max"].as_f64().unwrap();
    assert!((rmin - 972.0).abs() < 1.0, "{rmin}");
    assert!((rmax - 2678.0).abs() < 1.0, "{rmax}");
}

#[test]
fn plan_lists_the_circuit_and_stops() {
    let path = scenario("default.toml");
    let v: serde_json::Value = serde_json::from_str(&stdout(&fxsim(&["plan", path.to_str().unwrap()]))).unwrap();
    assert_eq!(v["circuit"]["k_points"].as_array().unwrap().len(), 5);
    assert_eq!(v["stops"].as_array().unwrap().len(), 2);
    assert_eq!(v["within_discharge_time"], true);
}

#[test]
fn simulate_then_metrics_reproduces_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let path = scenario("default.toml");
    let out = fxsim(&["simulate", path.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("PASS"));

    let written: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("metrics.json")).unwrap()).unwrap();
    let csv = dir.path().join("mission.csv");
    let again: serde_json::Value =
        serde_json::from_str(&stdout(&fxsim(&["metrics", csv.to_str().unwrap()]))).unwrap();
    assert_eq!(written, again);
}

#[test]
fn several_scenarios_land_in_their_own_directories() {
    let dir = tempfile::tempdir().unwrap();
    let a = scenario("default.toml");
    let b = scenario("sign_switching.toml");
    let out = fxsim(&[
        "simulate",
        a.to_str().unwrap(),
        b.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for stem in ["default", "sign_switching"] {
        assert!(dir.path().join(stem).join("mission.csv").is_file(), "{stem}");
    }
    let same = fxsim(&["simulate", a.to_str().unwrap(), a.to_str().unwrap(), "--out", "unused"]);
    assert!(!same.status.success());
}

#[test]
fn missing_files_fail_with_a_message() {
    let out = fxsim(&["plan", "no/such/file.toml"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error:"));
}
