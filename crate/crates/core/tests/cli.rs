//! End-to-end checks of the command-line front end: files, formats, exit
//! codes and byte stability.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str], out_dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_susy-forge"))
        .args(args)
        .arg("--out")
        .arg(out_dir)
        .env_remove("SUSY_FORGE_OUT")
        .output()
        .expect("binary runs")
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("missing {name}: {e}"))
}

fn csv_column(contents: &str, col: usize) -> Vec<f64> {
    contents
        .lines()
        .filter(|l| !l.starts_with('#') && !l.is_empty())
        .skip(1)
        .map(|l| l.split(',').nth(col).unwrap().parse().unwrap())
        .collect()
}

#[test]
fn partner_free_reproduces_the_well() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        &["partner", "--model", "free", "--k", "1", "--f0", "-0.25", "--grid-n", "8001"],
        dir.path(),
    );
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));

    let potentials = read(dir.path(), "potentials.csv");
    assert!(potentials.starts_with("# config-hash: "), "hash header present");
    let xs = csv_column(&potentials, 0);
    let v3 = csv_column(&potentials, 3);
    let i0 = xs.iter().position(|&x| x.abs() < 1e-9).expect("x = 0 on grid");
    assert!((v3[i0] + 2.0).abs() < 1e-5, "V3(0) = {}", v3[i0]);

    let chain = read(dir.path(), "chain.csv");
    assert_eq!(chain.lines().nth(1).unwrap(), "x,u1,u2,u3,w,f,psi_eps3");

    let meta: serde_json::Value = serde_json::from_str(&read(dir.path(), "meta.json")).unwrap();
    assert_eq!(meta["regime"]["regime"], "augmented");
    assert!((meta["sigma_minus"].as_f64().unwrap() - 0.125).abs() < 1e-6);
    assert_eq!(meta["x1"].as_f64().unwrap(), 0.0);
}

#[test]
fn partner_coulomb_is_isospectral_regime() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        &["partner", "--model", "coulomb", "--l", "0", "--f0", "-0.1", "--grid-n", "12000"],
        dir.path(),
    );
    assert!(out.status.success());
    let meta: serde_json::Value = serde_json::from_str(&read(dir.path(), "meta.json")).unwrap();
    assert_eq!(meta["regime"]["regime"], "isospectral");
    assert!(meta["missing_state"]["normalizable"].as_bool().unwrap());
}

#[test]
fn partner_forbidden_f0_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        &["partner", "--model", "coulomb", "--l", "0", "--f0", "0.2", "--grid-n", "6000"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(3));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("node"), "stderr names the node: {stderr}");
}

#[test]
fn partner_config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    fs::write(&cfg, r#"{"model":"free","k":1.0,"f0":-0.5,"grid_n":8001}"#).unwrap();
    // flag overrides the config's f0
    let out = run(
        &["partner", "--config", cfg.to_str().unwrap(), "--f0", "-0.25"],
        dir.path(),
    );
    assert!(out.status.success());
    let meta: serde_json::Value = serde_json::from_str(&read(dir.path(), "meta.json")).unwrap();
    assert_eq!(meta["f0"].as_f64().unwrap(), -0.25);
}

#[test]
fn partner_bad_config_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["partner", "--model", "nosuch"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let cfg = dir.path().join("broken.json");
    fs::write(&cfg, "{not json").unwrap();
    let out = run(&["partner", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn spectrum_coulomb_matches_levels() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        &["spectrum", "--model", "coulomb", "--l", "0", "--f0", "-0.1", "--levels", "3"],
        dir.path(),
    );
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let spec: serde_json::Value = serde_json::from_str(&read(dir.path(), "spectrum.json")).unwrap();
    for side in ["v0", "v3"] {
        let levels = spec[side]["levels"].as_array().unwrap();
        let expected = [-1.0, -0.25, -1.0 / 9.0];
        for (lv, e) in levels.iter().zip(expected) {
            assert!(
                (lv["energy"].as_f64().unwrap() - e).abs() < 1e-3,
                "{side}: {} vs {e}",
                lv["energy"]
            );
        }
    }
}

#[test]
fn spectrum_free_single_partner_level() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        &[
            "spectrum", "--model", "free", "--k", "1", "--f0", "-0.25", "--levels", "1", "--grid-n", "20001",
            "--bracket", "-1.9", "-0.0001",
        ],
        dir.path(),
    );
    assert!(out.status.success());
    let spec: serde_json::Value = serde_json::from_str(&read(dir.path(), "spectrum.json")).unwrap();
    assert!(spec["v0"].is_null(), "free base has no bound state");
    let v3 = spec["v3"]["levels"].as_array().unwrap();
    assert_eq!(v3.len(), 1);
    assert!((v3[0]["energy"].as_f64().unwrap() + 1.0).abs() < 1e-4);
}

#[test]
fn spectrum_empty_bracket_exits_four() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        &[
            "spectrum", "--model", "coulomb", "--l", "0", "--f0", "-0.1", "--grid-n", "12000", "--bracket", "0.5",
            "1.0",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn verify_free_suite_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["verify", "--suite", "free", "--k", "1"], dir.path());
    let report: serde_json::Value = serde_json::from_str(&read(dir.path(), "report.json")).unwrap();
    assert!(
        out.status.success(),
        "failures: {}",
        report["checks"]
            .as_array()
            .unwrap()
            .iter()
            .filter(|c| !c["pass"].as_bool().unwrap())
            .map(|c| c["name"].to_string())
            .collect::<Vec<_>>()
            .join(", ")
    );
    assert!(!report["config_hash"].as_str().unwrap().is_empty());
}

#[test]
fn verify_coulomb_suite_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["verify", "--suite", "coulomb", "--l", "0"], dir.path());
    let report: serde_json::Value = serde_json::from_str(&read(dir.path(), "report.json")).unwrap();
    assert!(
        out.status.success(),
        "failures: {}",
        report["checks"]
            .as_array()
            .unwrap()
            .iter()
            .filter(|c| !c["pass"].as_bool().unwrap())
            .map(|c| format!("{} = {}", c["name"], c["value"]))
            .collect::<Vec<_>>()
            .join(", ")
    );
}

#[test]
fn verify_coarse_grid_fails_with_diagnosis() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["verify", "--suite", "free", "--grid-n", "101"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let report = read(dir.path(), "report.json");
    assert!(report.contains("discretization-too-coarse"), "diagnosis present");
}

#[test]
fn sweep_free_x1_monotone_and_errors_column() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        &[
            "sweep", "--model", "free", "--k", "1", "--grid-n", "8001", "--f0-range", "-0.5", "-0.12", "0.02",
        ],
        dir.path(),
    );
    assert!(out.status.success());
    let sweep = read(dir.path(), "sweep.csv");
    let mut x1_prev = f64::INFINITY;
    let mut saw_error_row = false;
    for line in sweep.lines().skip(2) {
        let cols: Vec<&str> = line.split(',').collect();
        if !cols[7].is_empty() {
            saw_error_row = true;
            continue;
        }
        let x1: f64 = cols[3].parse().unwrap();
        assert!(x1 < x1_prev, "x1 falls as f0 rises toward the boundary");
        x1_prev = x1;
    }
    assert!(saw_error_row, "singular rows report their error");
}

#[test]
fn sweep_empty_range_gives_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        &["sweep", "--model", "free", "--grid-n", "8001", "--f0-range", "-0.2", "-0.3", "0.01"],
        dir.path(),
    );
    assert!(out.status.success());
    let sweep = read(dir.path(), "sweep.csv");
    assert_eq!(sweep.lines().count(), 2, "hash header plus column header");
}

#[test]
fn outputs_are_byte_stable() {
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    for dir in [&dir_a, &dir_b] {
        let out = run(
            &["partner", "--model", "coulomb", "--l", "0", "--f0", "-0.1", "--grid-n", "6000"],
            dir.path(),
        );
        assert!(out.status.success());
    }
    for name in ["potentials.csv", "chain.csv", "meta.json"] {
        let a = fs::read(dir_a.path().join(name)).unwrap();
        let b = fs::read(dir_b.path().join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between identical runs");
    }
}

#[test]
fn env_var_sets_default_output_directory() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_susy-forge"))
        .args(["partner", "--model", "free", "--k", "1", "--f0", "-0.25", "--grid-n", "8001"])
        .env("SUSY_FORGE_OUT", dir.path())
        .output()
        .expect("binary runs");
    assert!(out.status.success());
    assert!(dir.path().join("potentials.csv").exists());
}
