use std::path::PathBuf;
use std::process::{Command, Output};

use paxp_core::report::{Aggregate, Record};
use paxp_core::smt::{evaluate_encoding, Problem};
use serde_json::Value;

fn golden(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(name)
}

fn paxp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_paxp"))
        .args(args)
        .env_remove("PAXP_SMT_SOLVER")
        .output()
        .expect("binary runs")
}

fn tree() -> String {
    golden("fixture.json").display().to_string()
}

fn points() -> String {
    golden("fixture_points.txt").display().to_string()
}

fn json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("JSON report")
}

fn type_matches(ty: &str, v: &Value) -> bool {
    match ty {
        "object" => v.is_object(),
        "array" => v.is_array(),
        "string" => v.is_string(),
        "integer" => v.is_u64() || v.is_i64(),
        "number" => v.is_number(),
        "boolean" => v.is_boolean(),
        "null" => v.is_null(),
        other => panic!("schema type {other}"),
    }
}

/// Checks the subset of JSON Schema used by the published report schema.
fn validate(schema: &Value, v: &Value, at: &str) {
    match &schema["type"] {
        Value::String(t) => assert!(type_matches(t, v), "{at}: expected {t}, got {v}"),
        Value::Array(ts) => assert!(
            ts.iter().any(|t| type_matches(t.as_str().unwrap(), v)),
            "{at}: expected one of {ts:?}"
        ),
        _ => {}
    }
    if let Some(options) = schema["enum"].as_array() {
        assert!(options.contains(v), "{at}: {v} not in {options:?}");
    }
    if let Some(required) = schema["required"].as_array() {
        for key in required {
            assert!(
                v.get(key.as_str().unwrap()).is_some(),
                "{at}: missing {key}"
            );
        }
    }
    if let (Some(props), Some(obj)) = (schema["properties"].as_object(), v.as_object()) {
        for (key, value) in obj {
            match props.get(key) {
                Some(sub) => validate(sub, value, &format!("{at}.{key}")),
                None => assert!(
                    schema["additionalProperties"] != false,
                    "{at}: unexpected {key}"
                ),
            }
        }
    }
    if let (Some(items), Some(arr)) = (schema.get("items"), v.as_array()) {
        for (n, item) in arr.iter().enumerate() {
            validate(items, item, &format!("{at}[{n}]"));
        }
    }
}

fn check_schema(report: &Value) {
    let text = include_str!("../schema/report.schema.json");
    let schema: Value = serde_json::from_str(text).unwrap();
    validate(&schema, report, "$");
}

fn records(report: &Value) -> Vec<Record> {
    serde_json::from_value(report["records"].clone()).unwrap()
}

fn aggregates(report: &Value) -> Vec<Aggregate> {
    serde_json::from_value(report["aggregates"].clone()).unwrap()
}

#[test]
fn explain_min_on_fixture() {
    let report = json(&paxp(&[
        "explain",
        "--tree",
        &tree(),
        "--instance",
        "4,4,2",
        "--delta",
        "0.93",
        "--mode",
        "min",
    ]));
    check_schema(&report);
    let recs = records(&report);
    assert_eq!(recs.len(), 1);
    assert_eq!(recs[0].kind, "MinPAXp");
    assert_eq!(recs[0].size, 1);
    assert_eq!(recs[0].features, vec!["f3"]);
    assert_eq!(recs[0].precision, "15/16");
    assert_eq!(recs[0].precision_decimal, "0.937500");
    assert_eq!(recs[0].is_subset_minimal, Some(true));
}

#[test]
fn explain_axp_on_fixture() {
    let report = json(&paxp(&[
        "explain",
        "--tree",
        &tree(),
        "--instance",
        "4,4,2",
        "--delta",
        "0.93",
        "--mode",
        "axp",
    ]));
    let recs = records(&report);
    assert_eq!(recs[0].kind, "AXp");
    assert_eq!(recs[0].size, 2);
    assert_eq!(recs[0].features, vec!["f1", "f3"]);
    assert_eq!(recs[0].precision, "1/1");
}

#[test]
fn explain_all_keeps_input_order() {
    let report = json(&paxp(&[
        "explain",
        "--tree",
        &tree(),
        "--instances",
        &points(),
        "--delta",
        "0.93",
    ]));
    check_schema(&report);
    let recs = records(&report);
    assert_eq!(recs.len(), 32 * 3);
    let expected: Vec<Vec<String>> = std::fs::read_to_string(points())
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect();
    for (n, chunk) in recs.chunks(3).enumerate() {
        assert!(chunk.iter().all(|r| r.instance == expected[n]));
        let kinds: Vec<&str> = chunk.iter().map(|r| r.kind.as_str()).collect();
        assert_eq!(kinds, ["AXp", "ApproxPAXp", "MinPAXp"]);
        assert!(chunk[2].size <= chunk[1].size);
    }
}

#[test]
fn aggregates_recompute_from_records() {
    let report = json(&paxp(&[
        "stats",
        "--tree",
        &tree(),
        "--instances",
        &points(),
        "--delta",
        "0.93",
        "--delta",
        "1.0",
    ]));
    check_schema(&report);
    let recs = records(&report);
    let aggs = aggregates(&report);
    assert_eq!(aggs.len(), 4);
    for agg in &aggs {
        let group: Vec<Record> = recs
            .iter()
            .filter(|r| r.kind == agg.kind && r.delta == agg.delta)
            .cloned()
            .collect();
        let mut again = Aggregate::from_records(&group).unwrap();
        assert!((again.time_avg_secs - agg.time_avg_secs).abs() < 1e-9);
        again.time_avg_secs = agg.time_avg_secs;
        assert_eq!(&again, agg);
    }
    let approx93 = aggs
        .iter()
        .find(|a| a.kind == "ApproxPAXp" && a.delta == "0.93")
        .unwrap();
    assert_eq!(approx93.count, 32);
    assert_eq!(approx93.subset_minimal_fraction, Some(1.0));
    for agg in aggs.iter().filter(|a| a.delta == "1.0") {
        assert_eq!(agg.precision_avg, "1/1");
    }
}

#[test]
fn usage_errors_exit_2() {
    let out = paxp(&[
        "explain",
        "--tree",
        &tree(),
        "--instance",
        "4,4,2",
        "--delta",
        "1.5",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let out = paxp(&[
        "emit-smt",
        "--tree",
        &tree(),
        "--instance",
        "4,4,2",
        "--delta",
        "0.93",
        "--k",
        "1",
        "--encoding",
        "foo",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let out = paxp(&["explain", "--tree", &tree(), "--delta", "0.93"]);
    assert_eq!(out.status.code(), Some(2));

    let empty = tempfile::NamedTempFile::new().unwrap();
    let out = paxp(&[
        "stats",
        "--tree",
        &tree(),
        "--instances",
        empty.path().to_str().unwrap(),
        "--delta",
        "0.93",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no instances"));
}

#[test]
fn validation_errors_exit_3() {
    let out = paxp(&[
        "explain",
        "--tree",
        "/nonexistent/tree.json",
        "--instance",
        "1,1,1",
        "--delta",
        "0.5",
    ]);
    assert_eq!(out.status.code(), Some(3));

    let bad = tempfile::NamedTempFile::new().unwrap();
    let text = std::fs::read_to_string(tree())
        .unwrap()
        .replace("[2, 3, 4], \"child\": 3", "[2, 3], \"child\": 3");
    std::fs::write(bad.path(), text).unwrap();
    let out = paxp(&[
        "explain",
        "--tree",
        bad.path().to_str().unwrap(),
        "--instance",
        "1,1,1",
        "--delta",
        "0.5",
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("edges do not cover domain at node 1"));

    let out = paxp(&[
        "explain",
        "--tree",
        &tree(),
        "--instance",
        "4,4,9",
        "--delta",
        "0.5",
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn missing_solver_exits_4() {
    let out = paxp(&[
        "explain",
        "--tree",
        &tree(),
        "--instance",
        "4,4,2",
        "--delta",
        "0.93",
        "--backend",
        "smt-mult",
    ]);
    assert_eq!(out.status.code(), Some(4));
    let out = paxp(&[
        "explain",
        "--tree",
        &tree(),
        "--instance",
        "4,4,2",
        "--delta",
        "0.93",
        "--mode",
        "min",
        "--backend",
        "smt-add",
        "--solver",
        "/nonexistent/solver",
    ]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn emit_smt_matches_golden_files() {
    for (encoding, file) in [
        ("mult", "fixture_mult_k1.smt2"),
        ("add", "fixture_add_k1.smt2"),
    ] {
        let run = || {
            let out = paxp(&[
                "emit-smt",
                "--tree",
                &tree(),
                "--instance",
                "4,4,2",
                "--delta",
                "0.93",
                "--k",
                "1",
                "--encoding",
                encoding,
            ]);
            assert!(out.status.success());
            out.stdout
        };
        let first = run();
        assert_eq!(first, run(), "{encoding} output is not deterministic");
        let expected = std::fs::read(golden(file)).unwrap();
        assert_eq!(
            String::from_utf8(first).unwrap(),
            String::from_utf8(expected).unwrap()
        );

        // The golden problem still counts correctly: u = (1,1,0) is {f3} fixed.
        let problem =
            Problem::from_smtlib(&std::fs::read_to_string(golden(file)).unwrap()).unwrap();
        let eval = evaluate_encoding(&problem, &[true, true, false]).unwrap();
        let counts: Vec<u32> = eval
            .path_counts
            .iter()
            .map(|c| c.try_into().unwrap())
            .collect();
        assert_eq!(counts, [1, 3, 3, 0, 9]);
        assert!(eval.satisfied());
        let eval = evaluate_encoding(&problem, &[true, true, true]).unwrap();
        assert!(!eval.satisfied());
    }
}

#[test]
fn emit_smt_writes_out_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("q.smt2");
    let out = paxp(&[
        "emit-smt",
        "--tree",
        &tree(),
        "--instance",
        "4,4,2",
        "--delta",
        "0.93",
        "--k",
        "1",
        "--encoding",
        "mult",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    assert_eq!(
        std::fs::read(&path).unwrap(),
        std::fs::read(golden("fixture_mult_k1.smt2")).unwrap()
    );
}

#[test]
fn verify_fixture_space_passes() {
    let report = json(&paxp(&[
        "verify",
        "--tree",
        &tree(),
        "--instances",
        &points(),
        "--delta",
        "0.93",
        "--delta",
        "1.0",
    ]));
    check_schema(&report);
    let checks = report["checks"].as_array().unwrap();
    assert_eq!(checks.len(), 32 * (2 + 2 * 3));
    assert!(checks.iter().all(|c| c["status"] == "pass"));
}

#[test]
fn verify_reports_budget_skips() {
    let report = json(&paxp(&[
        "verify",
        "--tree",
        &tree(),
        "--instances",
        &points(),
        "--delta",
        "0.93",
        "--budget",
        "31",
    ]));
    check_schema(&report);
    let checks = report["checks"].as_array().unwrap();
    assert_eq!(checks.len(), 32);
    assert!(checks.iter().all(|c| c["status"] == "skipped: budget"));
}

#[test]
fn verify_detects_corrupted_counts() {
    let out = paxp(&[
        "verify",
        "--tree",
        &tree(),
        "--instance",
        "4,4,2",
        "--delta",
        "0.93",
        "--corrupt-count",
    ]);
    assert_eq!(out.status.code(), Some(5));
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    let failed: Vec<&Value> = report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["status"] == "fail")
        .collect();
    assert_eq!(failed.len(), 1);
    assert_eq!(failed[0]["check"], "precision");
}

#[test]
fn explain_with_external_solver() {
    let Ok(solver) = std::env::var("PAXP_SMT_SOLVER") else {
        return;
    };
    for backend in ["smt-mult", "smt-add"] {
        let report = json(&paxp(&[
            "explain",
            "--tree",
            &tree(),
            "--instances",
            &points(),
            "--delta",
            "0.93",
            "--backend",
            backend,
            "--solver",
            &solver,
        ]));
        let builtin = json(&paxp(&[
            "explain",
            "--tree",
            &tree(),
            "--instances",
            &points(),
            "--delta",
            "0.93",
        ]));
        let sizes = |r: &Value| -> Vec<usize> {
            records(r)
                .iter()
                .filter(|r| r.kind == "MinPAXp")
                .map(|r| r.size)
                .collect()
        };
        assert_eq!(sizes(&report), sizes(&builtin), "{backend}");
    }
}
