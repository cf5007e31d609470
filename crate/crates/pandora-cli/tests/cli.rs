//! End-to-end command tests: outputs, file formats, and the exit-code
//! contract (0 success, 1 verification failure, 2 usage/parse errors).

use std::fs;
use std::process::Command;

fn pandora() -> Command {
    Command::new(env!("CARGO_BIN_EXE_pandora"))
}

fn coins_file(dir: &std::path::Path) -> std::path::PathBuf {
    let path = dir.join("coins.json");
    fs::write(
        &path,
        r#"{ "boxes": [ { "cost": "1/8", "support": [ ["0", "1/2"], ["1", "1/2"] ] },
                        { "cost": "1/8", "support": [ ["0", "1/2"], ["1", "1/2"] ] } ] }"#,
    )
    .unwrap();
    path
}

#[test]
fn solve_both_modes() {
    let tmp = tempfile::tempdir().unwrap();
    let inst = coins_file(tmp.path());
    let table = tmp.path().join("table.json");

    let out = pandora()
        .args(["solve", "--instance"])
        .arg(&inst)
        .arg("--table")
        .arg(&table)
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "5/8");
    let table_json = fs::read_to_string(&table).unwrap();
    assert!(table_json.contains("\"unopened\""));

    let out = pandora()
        .args(["solve", "--mode", "classic", "--instance"])
        .arg(&inst)
        .output()
        .unwrap();
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "9/16");

    let out = pandora()
        .args(["classic", "--instance"])
        .arg(&inst)
        .output()
        .unwrap();
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "9/16");
}

#[test]
fn malformed_json_exits_2_with_diagnostic() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = tmp.path().join("bad.json");
    fs::write(&bad, "{ not json").unwrap();
    let out = pandora()
        .args(["solve", "--instance"])
        .arg(&bad)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
}

#[test]
fn invalid_instance_reports_box_indexed_violations() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = tmp.path().join("bad.json");
    fs::write(
        &bad,
        r#"{ "boxes": [ { "cost": "-1", "support": [ ["0", "9/10"] ] } ] }"#,
    )
    .unwrap();
    let out = pandora()
        .args(["solve", "--instance"])
        .arg(&bad)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("box 1"), "missing box index: {err}");
    assert!(err.contains("cost") && err.contains("sum"), "{err}");
}

#[test]
fn usage_errors_exit_2() {
    let out = pandora().args(["solve"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = pandora().args(["nonsense"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn structured_roundtrips_through_eval() {
    let tmp = tempfile::tempdir().unwrap();
    let inst = coins_file(tmp.path());
    let policy = tmp.path().join("policy.json");
    let out = pandora()
        .args(["structured", "--instance"])
        .arg(&inst)
        .arg("--out")
        .arg(&policy)
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "5/8");

    let out = pandora()
        .args(["eval", "--instance"])
        .arg(&inst)
        .arg("--policy")
        .arg(&policy)
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "5/8");
}

#[test]
fn reduce_answers_and_writes_sidecar() {
    let tmp = tempfile::tempdir().unwrap();
    for (multiset, expected) in [("1,1", "yes"), ("1,2", "no"), ("1,1,2", "yes")] {
        let out = pandora()
            .args(["reduce", "--partition", multiset, "--answer"])
            .output()
            .unwrap();
        assert!(out.status.success());
        assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), expected);
    }

    let inst = tmp.path().join("hard.json");
    let out = pandora()
        .args(["reduce", "--partition", "1,2,3"])
        .arg("--out")
        .arg(&inst)
        .output()
        .unwrap();
    assert!(out.status.success());
    let meta: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("hard.meta.json")).unwrap())
            .unwrap();
    for key in ["gamma", "delta", "y", "t", "tau_H", "k1", "k2", "C"] {
        assert!(meta.get(key).is_some(), "meta missing {key}");
    }
    // the emitted instance parses and has n + 2 boxes
    let parsed: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&inst).unwrap()).unwrap();
    assert_eq!(parsed["boxes"].as_array().unwrap().len(), 5);

    // the answer guardrail refuses larger multisets
    let out = pandora()
        .args(["reduce", "--partition", "1,1,2,2", "--answer"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_pass_and_fail_exit_codes() {
    let out = pandora()
        .args(["verify", "--suite", "index-identity", "--cases", "25"])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("PASS"));

    let out = pandora()
        .args(["verify", "--suite", "no-such-suite"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn ptas_report_columns() {
    let tmp = tempfile::tempdir().unwrap();
    let inst = coins_file(tmp.path());
    let report = tmp.path().join("report.csv");
    let policy = tmp.path().join("policy.json");
    let out = pandora()
        .args(["ptas", "--instance"])
        .arg(&inst)
        .args(["--epsilon", "1/10", "--report"])
        .arg(&report)
        .arg("--out")
        .arg(&policy)
        .output()
        .unwrap();
    assert!(out.status.success());
    let csv = fs::read_to_string(&report).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "theta,m,opt_lower,opt_exact,opt_L,lifted_payoff,ratio"
    );
    let row = lines.next().unwrap();
    assert!(row.contains("5/8"));
    assert!(fs::read_to_string(&policy).unwrap().contains("\"state\""));
}

#[test]
fn index_writes_traces_and_summary() {
    let tmp = tempfile::tempdir().unwrap();
    let inst = coins_file(tmp.path());
    let traces = tmp.path().join("traces.jsonl");
    let summary = tmp.path().join("summary.csv");
    let out = pandora()
        .args(["index", "--instance"])
        .arg(&inst)
        .args(["--seed", "3", "--trials", "64", "--traces"])
        .arg(&traces)
        .arg("--summary")
        .arg(&summary)
        .output()
        .unwrap();
    assert!(out.status.success());
    let lines: Vec<String> = fs::read_to_string(&traces)
        .unwrap()
        .lines()
        .map(String::from)
        .collect();
    assert_eq!(lines.len(), 64);
    for line in &lines {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert!(v.get("payoff").is_some());
    }
    let csv = fs::read_to_string(&summary).unwrap();
    assert!(csv.starts_with("policy,trials,seed,mean,stderr\nindex,64,3,"));
}

#[test]
fn bench_empty_directory_emits_bare_header() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("empty");
    fs::create_dir(&dir).unwrap();
    let out = pandora()
        .args(["bench", "--dir"])
        .arg(&dir)
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(
        String::from_utf8_lossy(&out.stdout),
        "instance,method,value\n"
    );
}

#[test]
fn instance_files_roundtrip_byte_exactly() {
    // parse(serialize(x)) is structural identity; serialize twice is
    // byte identity
    let tmp = tempfile::tempdir().unwrap();
    let inst = coins_file(tmp.path());
    let parsed = pandora::PnoiInstance::from_json_file(&inst).unwrap();
    let once = parsed.to_json_string();
    let again = pandora::PnoiInstance::from_json_str(&once).unwrap();
    assert_eq!(again, parsed);
    assert_eq!(again.to_json_string(), once);
}
