use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn vlcsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vlcsim"))
        .args(args)
        .output()
        .expect("spawning vlcsim")
}

fn ok(args: &[&str]) -> String {
    let out = vlcsim(args);
    assert!(
        out.status.success(),
        "vlcsim {args:?} failed:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

fn manifest(dir: &Path) -> Value {
    serde_json::from_reader(std::fs::File::open(dir.join("manifest.json")).unwrap()).unwrap()
}

fn without(header: &[String], rows: &[Vec<String>], column: &str) -> Vec<Vec<String>> {
    let skip = header.iter().position(|h| h == column).unwrap();
    rows.iter()
        .map(|r| r.iter().enumerate().filter(|(i, _)| *i != skip).map(|(_, v)| v.clone()).collect())
        .collect()
}

#[test]
fn solve_writes_results_iterations_graph_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let cfg = config("two_terminals.json");
    ok(&["solve", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--dump-conflict-graph"]);

    let (header, rows) = read_csv(&out.join("results.csv"));
    assert_eq!(rows.len(), 1);
    for col in ["algorithm", "protocol_power", "reality_power", "feasible", "iterations", "seed"] {
        assert!(header.iter().any(|h| h == col), "missing column {col}");
    }
    let (iter_header, iters) = read_csv(&out.join("iterations.csv"));
    assert_eq!(iter_header, ["iteration", "z_upper", "z_lower", "c_r", "wall_ms"]);
    assert!(!iters.is_empty());
    for r in &iters {
        let (zu, zl): (f64, f64) = (r[1].parse().unwrap(), r[2].parse().unwrap());
        assert!(zl <= zu + 1e-9 * zu.abs().max(1.0));
    }

    let graph = std::fs::read_to_string(out.join("conflict_graph.txt")).unwrap();
    assert!(graph.starts_with("# sir_threshold"));

    let m = manifest(&out);
    assert_eq!(m["tool"], "vlc-cli");
    assert_eq!(m["scenario_digest"].as_str().unwrap().len(), 64);
    let files: Vec<&str> = m["files"].as_array().unwrap().iter().map(|f| f.as_str().unwrap()).collect();
    for f in ["results.csv", "iterations.csv", "conflict_graph.txt", "manifest.json"] {
        assert!(files.contains(&f), "manifest does not list {f}");
    }
    assert!(m["tolerances"]["reduced_cost"].as_f64().unwrap() > 0.0);
}

#[test]
fn rerunning_solve_reproduces_everything_but_timing() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("two_terminals.json");
    let runs: Vec<PathBuf> = (0..2).map(|i| dir.path().join(format!("r{i}"))).collect();
    for out in &runs {
        ok(&["solve", "--config", cfg.to_str().unwrap(), "--algo", "vico", "--seed", "5", "--out", out.to_str().unwrap()]);
    }
    for file in ["results.csv", "iterations.csv"] {
        let (h0, r0) = read_csv(&runs[0].join(file));
        let (h1, r1) = read_csv(&runs[1].join(file));
        assert_eq!(h0, h1);
        assert_eq!(without(&h0, &r0, "wall_ms"), without(&h1, &r1, "wall_ms"), "{file} differs");
    }
    assert_eq!(manifest(&runs[0])["summary"], manifest(&runs[1])["summary"]);
}

#[test]
fn compare_emits_one_row_per_cell_and_seed() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("cmp");
    let cfg = config("two_terminals.json");
    let stdout = ok(&[
        "compare",
        "--config",
        cfg.to_str().unwrap(),
        "--axis",
        "demand",
        "--values",
        "10,40",
        "--algos",
        "cg,vico",
        "--seeds",
        "0..3",
        "--out",
        out.to_str().unwrap(),
    ]);
    let (header, rows) = read_csv(&out.join("results.csv"));
    assert_eq!(rows.len(), 2 * 2 * 3);
    let demand = header.iter().position(|h| h == "demand_bps").unwrap();
    let mut demands: Vec<f64> = rows.iter().map(|r| r[demand].parse().unwrap()).collect();
    demands.sort_by(f64::total_cmp);
    demands.dedup();
    assert_eq!(demands, [10e6, 40e6]);
    assert_eq!(stdout.lines().count(), 4);
    assert_eq!(manifest(&out)["summary"]["rows"], 12);
    assert!(manifest(&out)["scenario_digest"].is_null());
}

#[test]
fn compare_rejects_unknown_algorithms_and_bad_seeds() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x");
    let o = out.to_str().unwrap();
    let bad_algo = vlcsim(&["compare", "--axis", "uts", "--values", "5", "--algos", "cg,simplex", "--out", o]);
    assert!(!bad_algo.status.success());
    let bad_seeds = vlcsim(&["compare", "--axis", "uts", "--values", "5", "--seeds", "3..3", "--out", o]);
    assert!(!bad_seeds.status.success());
    let no_values = vlcsim(&["compare", "--axis", "uts", "--out", o]);
    assert!(!no_values.status.success());
    assert!(!out.exists());
}

#[test]
fn heatmap_covers_the_whole_desk_grid() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("hm");
    let cfg = config("two_terminals.json");
    ok(&["heatmap", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    let (header, rows) = read_csv(&out.join("heatmap.csv"));
    assert_eq!(header, ["x", "y", "mean_lux", "min_lux", "max_lux"]);
    // 3 m room sampled every 0.5 m.
    assert_eq!(rows.len(), 49);
    let m = manifest(&out);
    assert_eq!(m["summary"]["grid_points"], 49);
    assert_eq!(m["summary"]["violation_fraction"], 0.0);
    for r in &rows {
        let lo: f64 = r[3].parse().unwrap();
        let hi: f64 = r[4].parse().unwrap();
        assert!(lo >= 150.0 - 1e-6 && hi <= 500.0 + 1e-6);
    }
}

#[test]
fn unconstrained_heatmap_is_vico_only() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("hm");
    let cfg = config("reference_room.json");
    let c = cfg.to_str().unwrap();
    let o = out.to_str().unwrap();
    let refused = vlcsim(&["heatmap", "--config", c, "--no-illum-constraint", "--out", o]);
    assert!(!refused.status.success());
    assert!(String::from_utf8_lossy(&refused.stderr).contains("--algo vico"));

    ok(&["heatmap", "--config", c, "--algo", "vico", "--no-illum-constraint", "--out", o]);
    let m = manifest(&out);
    assert_eq!(m["summary"]["illuminance_constrained"], false);
    assert!(m["summary"]["violation_fraction"].as_f64().unwrap() > 0.0);
}

#[test]
fn sweep_reports_thresholds_and_bounds() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sw");
    let cfg = config("two_terminals.json");
    let stdout = ok(&[
        "sweep-sir",
        "--config",
        cfg.to_str().unwrap(),
        "--from",
        "1",
        "--to",
        "3",
        "--step",
        "0.5",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(stdout.contains("SIR_L") && stdout.contains("SIR_U"));
    let (header, rows) = read_csv(&out.join("sweep.csv"));
    assert_eq!(rows.len(), 5);
    let t = header.iter().position(|h| h == "sir_threshold").unwrap();
    let ts: Vec<f64> = rows.iter().map(|r| r[t].parse().unwrap()).collect();
    assert_eq!(ts, [1.0, 1.5, 2.0, 2.5, 3.0]);
    let summary = &manifest(&out)["summary"];
    assert!(summary.get("sir_lower").is_some() && summary.get("sir_upper").is_some());
}

#[test]
fn missing_config_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = vlcsim(&["solve", "--config", "/nonexistent/cfg.json", "--out", dir.path().to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("cfg.json"));
}
