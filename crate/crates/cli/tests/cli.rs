use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use carnot_fill::grid::CubicalGrid;
use carnot_fill::group::GroupSpec;
use carnot_fill::io::multiscale_from_jsonl;
use tempfile::TempDir;

fn run(args: &[&str]) -> Output {
    run_with(args, &[])
}

fn run_with(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_carnot-fill"));
    cmd.args(args);
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().unwrap()
}

fn out_arg(dir: &TempDir, sub: &str) -> String {
    dir.path().join(sub).display().to_string()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn h3() -> CubicalGrid {
    CubicalGrid::for_group(&GroupSpec::preset("H3").unwrap()).unwrap()
}

#[test]
fn fill_sphere_verifies() {
    let dir = TempDir::new().unwrap();
    let out = out_arg(&dir, "f");
    let o = run(&["fill", "--group", "H3", "--family", "sphere", "--size", "8", "--out", &out]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report = json(&dir.path().join("f/sphere_r8.report.json"));
    assert_eq!(report["report"]["verified"], true);
    assert_eq!(report["report"]["total_mass"], 4096);
    assert!(report["report"].get("wall_time_ms").is_none());
}

#[test]
fn usage_errors() {
    let dir = TempDir::new().unwrap();
    let out = out_arg(&dir, "u");
    let o = run(&["fill", "--family", "sphere", "--size", "0", "--out", &out]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["sweep", "--family", "sphere", "--sizes", "2,4", "--out", &out]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("at least 3"));
    let o = run(&["fill", "--size", "2", "--offset-policy", "nearest", "--out", &out]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["fill", "--group", "H3", "--spec", "x.json", "--size", "2"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn corrupted_cycle_is_rejected() {
    let dir = TempDir::new().unwrap();
    let out = out_arg(&dir, "c");
    assert!(run(&["fill", "--size", "2", "--out", &out]).status.success());
    let path = dir.path().join("c/sphere_r2.cycle.jsonl");
    let text = fs::read_to_string(&path).unwrap();
    let mut lines: Vec<&str> = text.lines().collect();
    lines.pop();
    let broken = dir.path().join("broken.jsonl");
    fs::write(&broken, lines.join("\n")).unwrap();
    let o = run(&["fill", "--input", broken.to_str().unwrap(), "--out", &out]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("input is not a cycle"));

    let o = run(&["fill", "--input", path.to_str().unwrap(), "--out", &out]);
    assert!(o.status.success());
    assert_eq!(json(&dir.path().join("c/input.report.json"))["report"]["total_mass"], 16);
}

#[test]
fn sweep_series_matches_reloaded_chains() {
    let dir = TempDir::new().unwrap();
    let out = out_arg(&dir, "s");
    let o = run(&["sweep", "--family", "commutator", "--sizes", "4..32", "--out", &out]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(dir.path().join("s/series.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("group,family,r,d,V,mass,I,slope_running"));
    let grid = h3();
    let mut count = 0;
    for line in lines {
        let f: Vec<&str> = line.split(',').collect();
        let r: u64 = f[2].parse().unwrap();
        let mass: u128 = f[5].parse().unwrap();
        assert_eq!(mass, 2 * (r as u128).pow(3));
        let chain = fs::read_to_string(dir.path().join(format!("s/chains/commutator_r{r}.jsonl"))).unwrap();
        let beta = multiscale_from_jsonl(&grid, &chain, 2).unwrap();
        assert_eq!(beta.mass(&grid), mass);
        count += 1;
    }
    assert_eq!(count, 4);
    let summary = json(&dir.path().join("s/summary.json"));
    let slope = summary["fit"]["slope"].as_f64().unwrap();
    assert!((slope - 3.0).abs() < 0.3);
    assert_eq!(summary["members"][0]["offsets"].as_array().unwrap().len(), 3);
}

#[test]
fn sphere_sweep_slope() {
    let dir = TempDir::new().unwrap();
    let out = out_arg(&dir, "s");
    let o = run(&["sweep", "--family", "sphere", "--sizes", "2,4,8,16", "--out", &out]);
    assert!(o.status.success());
    let slope = json(&dir.path().join("s/summary.json"))["fit"]["slope"].as_f64().unwrap();
    assert!((slope - 4.0 / 3.0).abs() <= 0.15, "{slope}");

    let fit_dir = out_arg(&dir, "fit");
    let series = dir.path().join("s/series.csv");
    let o = run(&["fit", "--input", series.to_str().unwrap(), "--out", &fit_dir]);
    assert!(o.status.success());
    let fit = json(&dir.path().join("fit/fit.json"));
    assert!((fit["slope"].as_f64().unwrap() - slope).abs() < 1e-12);
}

#[test]
fn outputs_do_not_depend_on_thread_count() {
    let dir = TempDir::new().unwrap();
    let mut files = Vec::new();
    for threads in ["1", "4"] {
        let out = out_arg(&dir, threads);
        let o = run_with(
            &[
                "sweep", "--family", "random", "--dim", "1", "--seed", "7", "--sizes", "3,4,5",
                "--oracle", "--out", &out,
            ],
            &[("RAYON_NUM_THREADS", threads)],
        );
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let root = dir.path().join(threads);
        files.push(
            ["series.csv", "summary.json", "chains/random_r4.jsonl"]
                .map(|f| fs::read(root.join(f)).unwrap()),
        );
    }
    assert_eq!(files[0], files[1]);
}

#[test]
fn oracle_rows() {
    let dir = TempDir::new().unwrap();
    let out = out_arg(&dir, "o");
    let o = run(&["oracle", "--family", "sphere", "--sizes", "2,4,8", "--out", &out]);
    assert!(o.status.success());
    let csv = fs::read_to_string(dir.path().join("o/oracle.csv")).unwrap();
    let oracle: Vec<u64> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(6).unwrap().parse().unwrap())
        .collect();
    assert_eq!(oracle, vec![16, 256, 4096]);

    let o = run(&["oracle", "--family", "commutator", "--out", &out]);
    assert!(o.status.success());
    let csv = fs::read_to_string(dir.path().join("o/oracle.csv")).unwrap();
    assert_eq!(csv, "group,family,r,d,V,constructed,oracle,ratio,status\n");

    let o = run(&["oracle", "--family", "commutator", "--sizes", "2,3", "--var-cap", "1500", "--out", &out]);
    assert!(o.status.success());
    let csv = fs::read_to_string(dir.path().join("o/oracle.csv")).unwrap();
    let rows: Vec<Vec<&str>> = csv.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows[0][6], "8");
    assert!(rows[0][7].parse::<f64>().unwrap() <= 20.0);
    assert!(rows[1][8].starts_with("skipped"));
    assert!(String::from_utf8_lossy(&o.stderr).contains("warning"));
}

#[test]
fn averaging_constants() {
    let dir = TempDir::new().unwrap();
    let out = out_arg(&dir, "a");
    let o = run(&["avg", "--group", "H3", "--family", "sphere", "--sizes", "4,8,16", "--out", &out]);
    assert!(o.status.success());
    let csv = fs::read_to_string(dir.path().join("a/avg.csv")).unwrap();
    let c: Vec<f64> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(8).unwrap().parse().unwrap())
        .collect();
    let (lo, hi) = c.iter().fold((f64::MAX, 0f64), |(a, b), &x| (a.min(x), b.max(x)));
    assert!(hi / lo < 2.0);

    let empty = dir.path().join("zero.jsonl");
    fs::write(&empty, "").unwrap();
    let o = run(&["avg", "--input", empty.to_str().unwrap(), "--dim", "1", "--out", &out]);
    assert!(o.status.success());
    let csv = fs::read_to_string(dir.path().join("a/avg.csv")).unwrap();
    assert_eq!(csv.lines().nth(1), Some("H3,file,0,1,0,0,0.0,0,0.0,0.0"));

    let o = run(&["avg", "--group", "H5", "--family", "random", "--dim", "2", "--sizes", "3,4", "--out", &out]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(fs::read_to_string(dir.path().join("a/avg.csv")).unwrap().lines().count(), 3);
}

#[test]
fn spec_files_and_policies() {
    let dir = TempDir::new().unwrap();
    let spec = dir.path().join("h3.json");
    fs::write(&spec, r#"{"name":"mine","m1":2,"m2":1,"beta":[[0,1,0,1]]}"#).unwrap();
    for policy in ["best", "fixed", "average-study"] {
        let out = out_arg(&dir, policy);
        let o = run(&[
            "fill", "--spec", spec.to_str().unwrap(), "--family", "commutator", "--size", "4",
            "--offset-policy", policy, "--c-plan", "1/2", "--timing", "--out", &out,
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let rep = json(&dir.path().join(format!("{policy}/commutator_r4.report.json")));
        assert_eq!(rep["group"], "mine");
        assert_eq!(rep["report"]["verified"], true);
        assert!(rep["report"]["wall_time_ms"].is_number());
        let has_mean = rep["report"]["steps"][0].get("mean_l1_out").is_some();
        assert_eq!(has_mean, policy == "average-study");
    }
}
