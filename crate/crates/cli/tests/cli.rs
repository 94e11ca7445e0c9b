use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn loewner(args: &[&str], threads: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_loewner"))
        .args(args)
        .env("LOEWNER_THREADS", threads)
        .output()
        .expect("binary runs")
}

fn envelope(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn evolve_decays_like_exp_minus_t() {
    let out = loewner(&["evolve", "--tau", "0", "--p", "const:1", "--s", "0", "--t", "1", "--z", "0.5,0"], "1");
    assert_eq!(out.status.code(), Some(0));
    let env = envelope(&out);
    let v = env["result"]["points"][0]["value"][0].as_f64().unwrap();
    assert!((v - 0.1839397).abs() <= 1e-7 + 1e-9, "{v}");
    assert!((v - 0.5 * (-1.0f64).exp()).abs() <= 1e-9);
    assert_eq!(env["config"]["solver.rtol"], "1e-10");
}

#[test]
fn conjugate_trace_is_not_becker() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("trace.csv");
    let k = 0.3;
    let mut text = String::from("rho,theta_index,re_mu,im_mu\n");
    for rho in [1.2, 1.5, 2.0] {
        for j in 0..64 {
            let th = 2.0 * std::f64::consts::PI * j as f64 / 64.0;
            text += &format!("{rho},{j},{:.17e},{:.17e}\n", k * th.cos(), -k * th.sin());
        }
    }
    std::fs::write(&csv, text).unwrap();
    let out = loewner(&["classify", "--input", path(&csv)], "1");
    assert_eq!(out.status.code(), Some(0));
    let report = &envelope(&out)["result"];
    assert_eq!(report["is_becker"], false);
    assert_eq!(report["worst"]["n"], -1);
    assert!((report["max_violation"].as_f64().unwrap() - k).abs() < 1e-12);
}

#[test]
fn empty_radii_exit_with_validation_code() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("never.json");
    let out = loewner(&["extend", "--p", "koebe:0.5", "--radii", "", "--output", path(&target)], "1");
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(envelope(&out)["error"]["kind"], "config");
    assert!(!target.exists());
}

#[test]
fn invalid_herglotz_parameter_is_a_validation_error() {
    let out = loewner(&["chain", "--p", "koebe:1.5", "--z", "0.1"], "1");
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn chain_that_cannot_converge_exits_with_numerical_code() {
    let out = loewner(&["chain", "--p", "koebe:0.5", "--z", "0.5", "--set", "chain.horizon=2", "--set", "chain.tolerance=1e-12"], "1");
    assert_eq!(out.status.code(), Some(3));
    let env = envelope(&out);
    assert_eq!(env["error"]["kind"], "numerical");
    assert_eq!(env["error"]["diagnostics"]["error"], "convergence");
    assert!(env["result"].is_null());
}

#[test]
fn demo_koebe_is_becker() {
    let out = loewner(&["demo", "koebe", "--k", "0.5"], "0");
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let env = envelope(&out);
    assert_eq!(env["result"]["classification"]["is_becker"], true);
    assert!(env["result"]["chain"]["max_error"].as_f64().unwrap() < 1e-8);
    assert!(env["timing"].is_null());
}

#[test]
fn grid_reimport_reproduces_the_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let grid = dir.path().join("grid.json");
    let radii = "0.5,1.1,1.2,1.35,1.5,1.75,2,2.25,2.5";
    let direct = loewner(
        &["classify", "--p", "koebe:0.5", "--radii", radii, "--angles", "64", "--circles", "1.2,1.5,2"],
        "0",
    );
    assert_eq!(direct.status.code(), Some(0));
    let out = loewner(&["extend", "--p", "koebe:0.5", "--radii", radii, "--angles", "64", "--export", path(&grid)], "0");
    assert_eq!(out.status.code(), Some(0));
    let again = loewner(&["classify", "--input", path(&grid), "--circles", "1.2,1.5,2"], "1");
    assert_eq!(again.status.code(), Some(0));
    let (a, b) = (envelope(&direct), envelope(&again));
    assert_eq!(a["result"]["is_becker"], true);
    assert_eq!(a["result"]["is_becker"], b["result"]["is_becker"]);
    assert_eq!(a["result"]["max_violation"], b["result"]["max_violation"]);
}

#[test]
fn thread_count_does_not_change_the_bytes() {
    let args = ["extend", "--p", "koebe:0.3", "--radii", "0.5,1.5,2", "--angles", "32"];
    let serial = loewner(&args, "1");
    let parallel = loewner(&args, "4");
    assert_eq!(serial.status.code(), Some(0));
    assert_eq!(serial.stdout, parallel.stdout);
}

#[test]
fn config_file_and_flags_agree() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# radial flow\nfield.p = const:1\nt = 1\nz = 0.5,0; 0,0.25\n").unwrap();
    let from_file = loewner(&["evolve", "--config", path(&cfg)], "1");
    let from_flags = loewner(&["evolve", "--p", "const:1", "--t", "1", "--z", "0.5,0; 0,0.25"], "1");
    assert_eq!(from_file.status.code(), Some(0));
    assert_eq!(from_file.stdout, from_flags.stdout);

    // The echoed config replays the run.
    let env = envelope(&from_file);
    let echo: String = env["config"].as_object().unwrap().iter().map(|(k, v)| format!("{k} = {}\n", v.as_str().unwrap())).collect();
    let replay = dir.path().join("replay.cfg");
    std::fs::write(&replay, echo).unwrap();
    assert_eq!(loewner(&["evolve", "--config", path(&replay)], "1").stdout, from_file.stdout);
}

#[test]
fn output_and_exports_are_written() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    let trace = dir.path().join("mu.csv");
    let out = loewner(
        &["beltrami", "--map", "f1:0.5", "--circles", "1.5,2", "--angles", "64", "--export", path(&trace), "--format", "csv", "--output", path(&report)],
        "1",
    );
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let env: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert!(env["result"]["closed_form_error"].as_f64().unwrap() < 1e-6);
    let text = std::fs::read_to_string(&trace).unwrap();
    assert!(text.starts_with("rho,theta_index,re,im\n"));
    assert_eq!(text.lines().count(), 1 + 2 * 64);
}

#[test]
fn schwarzian_of_a_mobius_map_vanishes() {
    let out = loewner(&["schwarzian", "--map", "mobius:1;0.2;0.3,0.1;1"], "1");
    assert_eq!(out.status.code(), Some(0));
    let r = &envelope(&out)["result"];
    assert!(r["norm"].as_f64().unwrap() < 1e-10);
    assert_eq!(r["sufficient"], true);
}
