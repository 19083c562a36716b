use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use lplab::read_report;
use serde_json::{json, Value};

fn lplab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lplab")).args(args).output().expect("binary runs")
}

fn small_config(shapes: Value) -> Value {
    json!({
        "scenario": "prop23",
        "phi": {"name": "poissonQ"},
        "psi": {"name": "poissonQ"},
        "theta": "one",
        "grid": {"dimension": 1, "points_per_axis": 256, "half_extent": 16.0},
        "scales": {"t_min": 0.01, "t_max": 100.0, "count": 33},
        "test_family": {"shapes": shapes, "dilations": [1.0, 2.0], "translates": [0, 3], "seed": 7},
        "check_conditions": false
    })
}

fn write_config(dir: &Path, name: &str, cfg: &Value) -> String {
    let path = dir.join(name);
    fs::write(&path, serde_json::to_string_pretty(cfg).unwrap()).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn run_writes_artifacts_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "cfg.json", &small_config(json!(["gaussian_derivative", "band_noise"])));
    let mut csvs = Vec::new();
    for name in ["a", "b"] {
        let out = dir.path().join(name);
        let o = lplab(&["run", &cfg, "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let csv = fs::read_to_string(out.join("ratios.csv")).unwrap();
        assert_eq!(csv.lines().next(), Some("fname,lambda,lhs,rhs,ratio"));
        assert_eq!(csv.lines().count(), 5);
        assert!(out.join("plotdata").join("ratio_vs_lambda.csv").exists());

        let text = fs::read_to_string(out.join("report.json")).unwrap();
        let report = read_report(&out.join("report.json")).unwrap();
        assert_eq!(report.rows.len(), 4);
        assert!(report.pass);
        let again: Value = serde_json::to_value(&report).unwrap();
        assert_eq!(again, serde_json::from_str::<Value>(&text).unwrap());
        csvs.push(csv);
    }
    assert_eq!(csvs[0], csvs[1]);
}

#[test]
fn empty_family_gives_empty_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "cfg.json", &small_config(json!([])));
    let out = dir.path().join("out");
    let o = lplab(&["run", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.code().unwrap() <= 1, "{}", String::from_utf8_lossy(&o.stderr));
    let report = read_report(&out.join("report.json")).unwrap();
    assert!(report.rows.is_empty());
    let csv = fs::read_to_string(out.join("ratios.csv")).unwrap();
    assert_eq!(csv.trim_end(), "fname,lambda,lhs,rhs,ratio");
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small_config(json!(["band_noise"]));
    cfg["scenario"] = json!("cor31");
    cfg["p"] = json!(1.5);
    let path = write_config(dir.path(), "bad.json", &cfg);
    let o = lplab(&["run", &path, "--out", dir.path().join("out").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("config error"));

    let o = lplab(&["run", dir.path().join("missing.json").to_str().unwrap(), "--out", "x"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn kernels_list_names_builtins() {
    let o = lplab(&["kernels", "list"]);
    assert!(o.status.success());
    let text = String::from_utf8_lossy(&o.stdout);
    for name in ["poissonQ", "gaussian", "annulus_bump"] {
        assert!(text.contains(name), "{text}");
    }
}

#[test]
fn calderon_build_writes_partition() {
    let dir = tempfile::tempdir().unwrap();
    let o = lplab(&["calderon", "build", "--kernel", "poissonQ", "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let summary: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("calderon.json")).unwrap()).unwrap();
    assert!(summary.is_object());
    let ray = fs::read_to_string(dir.path().join("eta_ray.csv")).unwrap();
    assert!(ray.lines().count() > 2);
}

#[test]
fn constants_report_writes_table() {
    let dir = tempfile::tempdir().unwrap();
    let o = lplab(&["constants", "report", "--j-max", "4", "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(dir.path().join("constants.json").exists());
    let table = fs::read_to_string(dir.path().join("c_vs_j.csv")).unwrap();
    assert!(table.lines().count() >= 2);
}

#[test]
fn field_maximal_transform_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let p = |name: &str| dir.path().join(name).to_str().unwrap().to_string();
    let o = lplab(&["field", "sample", "--shape", "band-noise", "--points", "256", "--half-extent", "8", "--out", &p("f.bin")]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for op in ["peetre", "hl", "grand"] {
        let out = p(&format!("{op}.bin"));
        let o = lplab(&["maximal", "--op", op, "--in", &p("f.bin"), "--out", &out]);
        assert!(o.status.success(), "{op}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(Path::new(&out).exists());
    }
    let o = lplab(&[
        "transform", "g", "--kernel", "poissonQ", "--in", &p("f.bin"), "--out", &p("g.bin"), "--count", "24", "--csv", &p("g.csv"),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(fs::read_to_string(p("g.csv")).unwrap().lines().count(), 257);
}
