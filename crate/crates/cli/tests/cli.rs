use std::process::{Command, Output};

use serde_json::Value;

fn qhw(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qhw"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(args: &[&str]) -> Value {
    let out = qhw(args);
    assert_eq!(
        out.status.code(),
        Some(0),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_str(&stdout(&out)).unwrap()
}

#[test]
fn clock_matrix_as_pairs() {
    let v = json(&["ops", "--matrix", "1", "--format", "json"]);
    let m = &v["matrix"];
    let half = 3f64.sqrt() / 2.0;
    let entry = |i: usize, j: usize| (m[i][j][0].as_f64().unwrap(), m[i][j][1].as_f64().unwrap());
    assert_eq!(entry(0, 0), (1.0, 0.0));
    assert!((entry(1, 1).0 + 0.5).abs() < 1e-11 && (entry(1, 1).1 - half).abs() < 1e-11);
    assert!((entry(2, 2).0 + 0.5).abs() < 1e-11 && (entry(2, 2).1 + half).abs() < 1e-11);
    assert_eq!(entry(0, 1), (0.0, 0.0));
}

#[test]
fn commutation_of_clock_and_shift() {
    // h1 h2 = ω² h2 h1 by direct multiplication of the literal matrices
    let v = json(&["ops", "--commutation", "1", "2", "--format", "json"]);
    assert_eq!(v["phase"], 2);
    assert_eq!(v["commute"], false);
}

#[test]
fn label_out_of_range_is_usage_error() {
    let out = qhw(&["ops", "--matrix", "9"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("out of range"));
}

#[test]
fn unknown_flag_is_usage_error() {
    assert_eq!(qhw(&["ops", "--bogus"]).status.code(), Some(2));
}

#[test]
fn ghz_correlations_include_all_shift() {
    let v = json(&["state", "ghz", "--n", "4", "--correlations"]);
    let hit = v["correlations"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["label"] == "h2h2h2h2")
        .unwrap();
    assert!((hit["value"][0].as_f64().unwrap() - 1.0).abs() < 1e-11);
    assert!(hit["value"][1].as_f64().unwrap().abs() < 1e-11);
}

#[test]
fn path_graph_has_eighty_correlations() {
    let v = json(&["state", "graph:1-2,2-3,3-4", "--correlations"]);
    assert_eq!(v["correlations"].as_array().unwrap().len(), 80);
    assert_eq!(v["count"], 80);
}

#[test]
fn self_loop_rejected() {
    assert_eq!(qhw(&["state", "graph:1-1"]).status.code(), Some(2));
}

#[test]
fn product_state_amplitudes() {
    let v = json(&["state", "product:0,2"]);
    let amps = v["amplitudes"].as_array().unwrap();
    assert_eq!(amps.len(), 9);
    assert_eq!(amps[2][0], 1.0);
}

#[test]
fn tomography_round_trip_is_tight() {
    let v = json(&["tomo", "--sites", "2", "--samples", "3", "--format", "json"]);
    for row in v.as_array().unwrap() {
        assert!(row["max_error"].as_f64().unwrap() < 1e-9);
    }
}

#[test]
fn single_qutrit_pair_scan() {
    let v = json(&["comp", "pairs", "--sites", "1", "--restarts", "20", "--format", "json"]);
    assert_eq!(v["pairs"], 24);
    assert!(v["max_value"].as_f64().unwrap() <= 1.0 + 1e-6);
}

#[test]
fn criterion_file_round_trip() {
    let dir = std::env::temp_dir().join(format!("qhw-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let file = dir.join("c.json");
    std::fs::write(
        &file,
        r#"{"terms":[{"w":1.0,"idx":[2,2,2,2]},{"w":1.0,"idx":[0,1,1,1]}],"bound":1.0,"cuts":[[1,2]]}"#,
    )
    .unwrap();
    let path = file.to_str().unwrap();
    let v = json(&["criteria", "eval", "--criterion", path, "ghz", "--format", "json"]);
    assert_eq!(v["violated"], true);
    assert!((v["value"].as_f64().unwrap() - 2.0).abs() < 1e-9);
    let v = json(&[
        "criteria",
        "certify",
        "--criterion",
        path,
        "--restarts",
        "20",
        "--format",
        "json",
    ]);
    assert!(v[0]["separable_max"].as_f64().unwrap() <= 1.0 + 1e-6);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn reproduce_is_byte_identical_under_seed() {
    let a = qhw(&[
        "reproduce",
        "--seed",
        "7",
        "--only",
        "algebra",
        "--only",
        "tomography",
        "--only",
        "mixing",
    ]);
    let b = qhw(&[
        "reproduce",
        "--seed",
        "7",
        "--only",
        "algebra",
        "--only",
        "tomography",
        "--only",
        "mixing",
    ]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert!(stdout(&a).contains("overall: PASS"));
}

#[test]
fn failing_check_exits_one() {
    let out = qhw(&["reproduce", "--only", "cluster", "--restarts", "20"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("cluster FAIL"));
}

#[test]
fn csv_output() {
    let out = stdout(&qhw(&["ops", "--weyl", "--format", "csv"]));
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "label,phase,z,x,mub");
    assert_eq!(lines.len(), 10);
}
