use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn run(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dephasing"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn read(dir: &Path, file: &str) -> String {
    fs::read_to_string(dir.join(file)).unwrap_or_else(|e| panic!("{file}: {e}"))
}

fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines().skip(1).map(|l| l.split(',').map(str::to_string).collect()).collect()
}

fn num(s: &str) -> f64 {
    s.parse().unwrap()
}

#[test]
fn coefficients_for_every_family() {
    let dir = TempDir::new().unwrap();
    let o = run(&["coefficients", "--all-families"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let table = rows(&read(dir.path(), "coefficients.csv"));
    assert_eq!(table.len(), 3);
    for r in &table {
        assert_eq!(r.last().unwrap(), "PASS");
        assert!((num(&r[4]) - 2.0 * std::f64::consts::PI).abs() < 1e-12);
        assert!((num(&r[5]) - num(&r[4])).abs() <= 1e-4 * num(&r[4]));
    }
    let gaussian = &table[0];
    assert_eq!(gaussian[0], "gaussian");
    let b_exact = -std::f64::consts::PI.sqrt() / 2.0;
    assert!((num(&gaussian[8]) - b_exact).abs() < 1e-9);
    assert!((num(&gaussian[10]) - b_exact).abs() < 1e-3);
}

#[test]
fn decoherence_map_follows_quadratic_law() {
    let dir = TempDir::new().unwrap();
    let o = run(&["decoherence-map", "--n-sites", "5"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let table = rows(&read(dir.path(), "decoherence_map.csv"));
    assert_eq!(table.len(), 31);
    for r in &table {
        assert!(num(&r[4]) <= 1e-9);
    }
    let v: serde_json::Value = serde_json::from_str(&read(dir.path(), "decoherence_map.json")).unwrap();
    assert!(v["results"]["ode_max_deviation"].as_f64().unwrap() < 1e-6);
    let rate = |d: usize| num(&table[d - 1][3]);
    assert!((rate(2) / rate(1) - 4.0).abs() < 1e-9);
    assert!((rate(8) / rate(4) - 4.0).abs() < 1e-9);

    let hot = TempDir::new().unwrap();
    run(&["decoherence-map", "--n-sites", "5", "--beta", "0.5"], hot.path());
    let hot_rate = num(&rows(&read(hot.path(), "decoherence_map.csv"))[0][3]);
    assert!((hot_rate / rate(1) - 2.0).abs() < 1e-9);
}

#[test]
fn same_seed_gives_identical_files() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    let c = TempDir::new().unwrap();
    for d in [&a, &b] {
        assert_eq!(run(&["theorem", "--seed", "11"], d.path()).status.code(), Some(0));
    }
    run(&["theorem", "--seed", "12"], c.path());
    for f in ["theorem.csv", "theorem.json"] {
        assert_eq!(read(a.path(), f), read(b.path(), f));
    }
    assert_ne!(read(a.path(), "theorem.csv"), read(c.path(), "theorem.csv"));
}

#[test]
fn theorem_report_embeds_config_and_version() {
    let dir = TempDir::new().unwrap();
    run(&["theorem", "--lambda", "0.5"], dir.path());
    let v: serde_json::Value = serde_json::from_str(&read(dir.path(), "theorem.json")).unwrap();
    assert_eq!(v["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(v["config"]["model"]["lambda"], 0.5);
    assert_eq!(v["passed"], true);
    let slope = v["results"]["predicted_log_slope"].as_f64().unwrap();
    let fitted = v["results"]["fitted_log_slope"].as_f64().unwrap();
    assert!((fitted / slope - 1.0).abs() < 0.05);
}

#[test]
fn diagonal_observable_has_zero_distance() {
    let dir = TempDir::new().unwrap();
    assert_eq!(run(&["theorem", "--diagonal"], dir.path()).status.code(), Some(0));
    for r in rows(&read(dir.path(), "theorem.csv")) {
        assert_eq!(num(&r[1]), 0.0);
    }
}

#[test]
fn short_horizon_is_a_numerical_failure() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("short.toml");
    fs::write(&cfg, "[time]\nend = 1.0\npoints = 11\n").unwrap();
    let o = run(&["theorem", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let v: serde_json::Value = serde_json::from_str(&read(dir.path(), "theorem.json")).unwrap();
    assert_eq!(v["passed"], false);
    assert!(v["results"]["failure"].as_str().unwrap().contains("horizon"));
}

#[test]
fn pointer_projections_meet_bound() {
    let dir = TempDir::new().unwrap();
    let third = (1.0f64 / 3.0).to_string();
    let o = run(&["pointer", "--s", &format!("0.5,{third}")], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let table = rows(&read(dir.path(), "pointer.csv"));
    assert_eq!(table.len(), 24);
    for r in &table {
        assert_eq!(r[6], "PASS");
        assert_eq!(r[7], "PASS");
        if num(&r[0]) == 0.5 {
            assert_eq!(num(&r[4]), 0.0);
        }
    }
    let n10 = table.iter().find(|r| num(&r[0]) != 0.5 && r[1] == "10").unwrap();
    let expected = (341.0 / 1024.0 - 1.0 / 3.0f64).abs();
    assert!((num(&n10[4]) - expected).abs() < 1e-15);
    assert!((num(&n10[4]) - 3.26e-4).abs() < 1e-6);
}

#[test]
fn validation_errors_exit_with_one() {
    let dir = TempDir::new().unwrap();
    assert_eq!(run(&["coefficients", "--beta", "-1"], dir.path()).status.code(), Some(1));
    assert_eq!(run(&["pointer", "--s", "1.5"], dir.path()).status.code(), Some(1));
    assert_eq!(run(&["theorem", "--n-sites", "13"], dir.path()).status.code(), Some(1));
    assert_eq!(run(&["theorem", "--no-such-flag"], dir.path()).status.code(), Some(1));
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "[model]\nsites = 3\n").unwrap();
    assert_eq!(
        run(&["theorem", "--config", cfg.to_str().unwrap()], dir.path()).status.code(),
        Some(1)
    );
}

#[test]
fn flags_override_config_file() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, "seed = 3\n[model]\nn_sites = 3\nbeta = 2.0\n").unwrap();
    let o = run(&["decoherence-map", "--config", cfg.to_str().unwrap(), "--beta", "4"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&read(dir.path(), "decoherence_map.json")).unwrap();
    assert_eq!(v["config"]["model"]["n_sites"], 3);
    assert_eq!(v["config"]["model"]["beta"], 4.0);
    assert_eq!(v["config"]["seed"], 3);
}
