use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_can-coord"))
}

fn scenarios() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn paper() -> String {
    scenarios().join("paper.json").display().to_string()
}

fn csv_rows(text: &str) -> Vec<Vec<f64>> {
    text.lines()
        .skip(1)
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect()
}

#[test]
fn detect_on_bundled_scenarios() {
    let o = run(&["detect", "--scenario", &paper()]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let records: Vec<Value> = out
        .lines()
        .filter(|l| l.starts_with('{'))
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    let categories: Vec<&str> = records.iter().map(|r| r["category"].as_str().unwrap()).collect();
    assert_eq!(categories, ["A1", "B", "C2"]);
    assert!(out.contains("category  count"));

    let disjoint = scenarios().join("disjoint.json");
    let o = run(&["detect", "--scenario", disjoint.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(!stdout(&o).contains('{'));
}

#[test]
fn detect_error_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.json");
    fs::write(&empty, r#"{"parameters": [], "functions": []}"#).unwrap();
    let o = run(&["detect", "--scenario", empty.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("/functions"));

    let bad_type = dir.path().join("bad.json");
    fs::write(
        &bad_type,
        r#"{"parameters": [{"name": "a", "default": 0, "min": 0, "max": "1", "step": 1}], "functions": []}"#,
    )
    .unwrap();
    let o = run(&["detect", "--scenario", bad_type.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("/parameters/0/max"));

    let missing = dir.path().join("missing.json");
    assert_eq!(run(&["detect", "--scenario", missing.to_str().unwrap()]).status.code(), Some(1));
    assert_eq!(run(&["detect"]).status.code(), Some(2));
}

#[test]
fn detect_report_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("detect.json");
    let o = run(&["detect", "--scenario", &paper(), "--out", out.to_str().unwrap(), "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("category,function_a,function_b,subject,path,explanation\n"));
    let report: Value = serde_json::from_str(&fs::read_to_string(out).unwrap()).unwrap();
    assert_eq!(report["command"], "detect");
    assert_eq!(report["results"]["summary"]["C2"], 1);
}

#[test]
fn sweep_p1_peaks_at_six() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("p1.csv");
    let svg = dir.path().join("p1.svg");
    let o = run(&[
        "sweep", "--scenario", &paper(), "--param", "p1", "--set", "p2=100",
        "--out", csv.to_str().unwrap(), "--svg", svg.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("p1,o1,o2,product\n"));
    let rows = csv_rows(&text);
    assert_eq!(rows.len(), 11);
    let best = rows.iter().max_by(|a, b| a[3].total_cmp(&b[3])).unwrap();
    assert_eq!(best[0], 6.0);
    assert!(fs::read_to_string(svg).unwrap().contains("<polyline"));
    let report: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(report["artifacts"].as_array().unwrap().len(), 2);
}

#[test]
fn sweep_p2_is_non_decreasing() {
    let o = run(&["sweep", "--scenario", &paper(), "--param", "p2", "--set", "p1=6", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let rows = csv_rows(&stdout(&o));
    assert_eq!(rows.len(), 26);
    assert!(rows.windows(2).all(|w| w[1][3] >= w[0][3]));
    assert_eq!(rows.last().unwrap()[0], 300.0);
    let best = rows.iter().max_by(|a, b| a[3].total_cmp(&b[3])).unwrap();
    assert_eq!(best[0], 300.0);
}

#[test]
fn sweep_single_point_and_errors() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("one.json");
    fs::write(
        &path,
        r#"{"parameters": [{"name": "x", "default": 1, "min": 1, "max": 1, "step": 1}],
            "functions": [{"id": "F", "inputs": ["x"], "objective": "y", "evaluator": {"kind": "linear"}}]}"#,
    )
    .unwrap();
    let o = run(&["sweep", "--scenario", path.to_str().unwrap(), "--param", "x", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "x,y,product\n1,1,1\n");

    assert_eq!(run(&["sweep", "--scenario", &paper(), "--param", "p9"]).status.code(), Some(2));
    assert_eq!(run(&["sweep", "--scenario", &paper(), "--param", "p1", "--set", "p2=1"]).status.code(), Some(2));
}

#[test]
fn game_modes() {
    let o = run(&["game", "--payoffs", "3,2,4,1"]);
    assert_eq!(o.status.code(), Some(0));
    let report: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let a = &report["results"]["analysis"];
    assert_eq!(a["is_pd"], true);
    assert_eq!(a["dominant"], "T");
    assert_eq!(a["coordination_gain"], 1.0);

    let o = run(&["game", "--scenario", &paper(), "--conflict-index", "0"]);
    assert_eq!(o.status.code(), Some(0));
    let report: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(report["results"]["derived"]["parameter"], "p1");

    assert_eq!(run(&["game", "--scenario", &paper(), "--conflict-index", "1"]).status.code(), Some(2));
    assert_eq!(run(&["game", "--scenario", &paper(), "--conflict-index", "9"]).status.code(), Some(2));
    assert_eq!(run(&["game", "--payoffs", "1,2"]).status.code(), Some(2));
    assert_eq!(run(&["game"]).status.code(), Some(2));
}

#[test]
fn bargain_methods_and_report() {
    let dir = tempfile::tempdir().unwrap();
    for method in ["sequential", "ascent", "brute"] {
        let out = dir.path().join(format!("{method}.json"));
        let o = run(&["bargain", "--scenario", &paper(), "--method", method, "--out", out.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{method}");
        let report: Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
        let r = &report["results"];
        assert_eq!(r["method"], method);
        assert_eq!(r["config"]["p1"], 6.0);
        assert_eq!(r["config"]["p2"], 300.0);
        assert!(r["trace_length"].as_u64().unwrap() > 0);
        assert!(r["per_objective"]["o1"].is_number());
    }

    let o = run(&["bargain", "--scenario", &paper(), "--order", "p2,p1"]);
    let report: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(report["results"]["config"]["p2"], 50.0);

    let o = run(&["bargain", "--scenario", &paper(), "--disagreement", "o1=2"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["bargain", "--scenario", &paper(), "--disagreement", "o7=0"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn grid_cap_env_var() {
    let o = bin()
        .args(["bargain", "--scenario", &paper(), "--method", "brute"])
        .env("CAN_COORD_GRID_CAP", "100")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("286"));
}

#[test]
fn reproduce_paper_summary_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for d in [&a, &b] {
        let o = run(&["reproduce-paper", "--out", d.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        let summary: Value = serde_json::from_str(&stdout(&o)).unwrap();
        assert_eq!(summary["p1"], 6.0);
        assert_eq!(summary["p2"], 300.0);
        assert_eq!(summary["methods_agree"], true);
    }
    let mut names: Vec<_> = fs::read_dir(&a).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert!(names.len() >= 10);
    for name in names {
        assert_eq!(fs::read(a.join(&name)).unwrap(), fs::read(b.join(&name)).unwrap(), "{name:?}");
    }
}

#[test]
fn reproduce_paper_unwritable_dir() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("plain-file");
    fs::write(&file, "x").unwrap();
    let o = run(&["reproduce-paper", "--out", file.join("sub").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}
