use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ychannel"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is one JSON document")
}

fn golden(name: &str) -> Value {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn region_matches_golden() {
    let out = run(&["region", "4", "3", "2"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stderr.is_empty());
    assert_eq!(json(&out), golden("region_4_3_2.json"));
}

#[test]
fn region_of_zero_channel_has_one_vertex() {
    let doc = json(&run(&["region", "0", "0", "0", "--vertices"]));
    let vertices = doc["vertices"].as_array().unwrap();
    assert_eq!(vertices.len(), 1);
    assert!(vertices[0]["point"].as_array().unwrap().iter().all(|v| v == "0"));
}

#[test]
fn region_vertices_use_exact_fractions() {
    let doc = json(&run(&["region", "3", "3", "3", "--vertices"]));
    let fractional: Vec<&Value> = doc["vertices"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|v| v["point"].as_array().unwrap().iter().any(|x| x == "3/2"))
        .collect();
    assert_eq!(fractional.len(), 2);
}

#[test]
fn region_redundancy_report() {
    let doc = json(&run(&["region", "4", "3", "2", "--redundancy"]));
    for entry in doc["redundancy"].as_array().unwrap() {
        let label = entry["label"].as_str().unwrap();
        let expected = if label.starts_with("CS3") {
            "essential"
        } else {
            "redundant"
        };
        assert_eq!(entry["verdict"], expected, "{label}");
    }
}

#[test]
fn unordered_gains_exit_2() {
    let out = run(&["region", "2", "3", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
    assert!(!out.stderr.is_empty());
    assert_eq!(run(&["region", "4", "3", "-1"]).status.code(), Some(2));
}

#[test]
fn check_verdicts() {
    let out = run(&["check", "4", "3", "2", "1", "1", "1", "1", "1", "1"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["member"], true);

    let out = run(&["check", "4", "3", "2", "0", "3", "0", "0", "0", "0"]);
    assert_eq!(out.status.code(), Some(1));
    let doc = json(&out);
    assert_eq!(doc["member"], false);
    assert_eq!(doc["violated"], serde_json::json!(["CS3b"]));

    assert_eq!(
        run(&["check", "4", "3", "2", "0", "0", "0", "0", "0", "0"])
            .status
            .code(),
        Some(0)
    );
}

#[test]
fn check_parse_errors_exit_2() {
    for bad in ["1/0", "x", "0.5", "-1/2"] {
        let out = run(&["check", "4", "3", "2", "1", bad, "0", "0", "0", "0"]);
        assert_eq!(out.status.code(), Some(2), "{bad}");
        assert!(out.stdout.is_empty());
    }
}

#[test]
fn rationals_round_trip_through_check() {
    let doc = json(&run(&["check", "3", "3", "3", "6/4", "0", "0", "3/2", "3/2", "0"]));
    assert_eq!(doc["rates"], serde_json::json!(["3/2", "0", "0", "3/2", "3/2", "0"]));
    assert_eq!(doc["member"], true);
}

#[test]
fn plan_with_exhaustive_simulation() {
    let out = run(&[
        "plan",
        "4",
        "3",
        "2",
        "1",
        "1",
        "1",
        "1",
        "1",
        "1",
        "--simulate",
        "--exhaustive",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json(&out);
    assert_eq!(doc["schema"], "ychannel.plan/1");
    assert_eq!(doc["extension"]["factor"], 1);
    assert_eq!(doc["simulation"]["verdict"], "PASS");
    assert_eq!(doc["simulation"]["trials"], 64);
    assert_eq!(doc["simulation"]["mode"]["kind"], "exhaustive");
}

#[test]
fn fractional_plan_uses_extension() {
    let doc = json(&run(&["plan", "2", "2", "2", "2/3", "2/3", "2/3", "2/3", "2/3", "2/3"]));
    assert_eq!(doc["extension"]["factor"], 3);
    assert_eq!(
        doc["extension"]["config"],
        serde_json::json!({"n1": 6, "n2": 6, "n3": 6})
    );
    assert_eq!(doc["extension"]["rates"], serde_json::json!([2, 2, 2, 2, 2, 2]));
    assert!(doc.get("simulation").is_none());
}

#[test]
fn unidirectional_plan_simulates() {
    let doc = json(&run(&[
        "plan",
        "4",
        "3",
        "2",
        "3",
        "0",
        "0",
        "0",
        "0",
        "0",
        "--simulate",
    ]));
    let kinds: Vec<&str> = doc["assignments"]
        .as_array()
        .unwrap()
        .iter()
        .map(|a| a["kind"].as_str().unwrap())
        .collect();
    assert_eq!(kinds, ["unidirectional"]);
    assert_eq!(doc["simulation"]["verdict"], "PASS");
}

#[test]
fn plan_random_mode_is_seeded() {
    let args = [
        "plan",
        "5",
        "4",
        "3",
        "2",
        "1",
        "1",
        "1",
        "1",
        "1",
        "--simulate",
        "--seed",
        "42",
        "--trials",
        "50",
    ];
    let a = run(&args);
    assert_eq!(a.status.code(), Some(0));
    let doc = json(&a);
    assert_eq!(
        doc["simulation"]["mode"],
        serde_json::json!({"kind": "random", "seed": 42, "count": 50})
    );
    assert_eq!(a.stdout, run(&args).stdout);
}

#[test]
fn plan_outside_region_exit_1() {
    let out = run(&["plan", "4", "3", "2", "4", "0", "0", "0", "0", "0"]);
    assert_eq!(out.status.code(), Some(1));
    let doc = json(&out);
    assert_eq!(doc["error"], "NOT_IN_REGION");
    assert!(doc["violated"].as_array().unwrap().contains(&Value::from("TRB1")));
}

#[test]
fn scan_small() {
    for n in ["1", "2"] {
        let out = run(&["scan", "--max-n1", n, "--seed", "3"]);
        assert_eq!(out.status.code(), Some(0));
        let doc = json(&out);
        assert_eq!(doc["verdict"], "PASS");
        assert!(doc["configs"].as_array().unwrap().iter().all(|c| c["probes"] == 1000));
    }
}

#[test]
fn scan_refuses_large_n1() {
    let out = run(&["scan", "--max-n1", "9"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
}

#[test]
fn output_flag_writes_file() {
    let path = std::env::temp_dir().join(format!("ychannel-cli-{}.json", std::process::id()));
    let out = run(&["region", "4", "3", "2", "--output", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let written: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    std::fs::remove_file(&path).unwrap();
    assert_eq!(written, golden("region_4_3_2.json"));
}
