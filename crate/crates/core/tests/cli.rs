mod common;

use std::process::{Command, Output};

use cbnorm::cli::{ResultRecord, REPORT_HEADER};

fn lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cbnorm-lab")).args(args).output().unwrap()
}

fn write(dir: &tempfile::TempDir, name: &str, body: &str) -> String {
    let p = dir.path().join(name);
    std::fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_owned()
}

#[test]
fn sandwich_record_has_certified_upper() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = common::configs_dir().join("sandwich_moebius.json");
    let out = dir.path().join("r.json");
    let o = lab(&["sandwich", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let rec: ResultRecord = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(rec.schema_version, 1);
    assert_eq!(rec.outputs["upper"].as_f64(), Some(2.0));
    assert!(!rec.witnesses.is_empty());
}

#[test]
fn seed_override_changes_the_echo_only_where_expected() {
    let cfg = common::configs_dir().join("estimate_identity.json");
    let a = lab(&["estimate", "--config", cfg.to_str().unwrap(), "--seed", "99"]);
    assert_eq!(a.status.code(), Some(0));
    let rec: ResultRecord = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(rec.config["seed"].as_u64(), Some(99));
}

#[test]
fn input_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(&dir, "bad.json", r#"{"command":"sandwich","seed":1,"params":{"function":{"type":"moebius","a":[1]},"max_level":2,"budget":10}}"#);
    let o = lab(&["sandwich", "--config", &bad]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("params.function"));

    let mismatch = write(&dir, "m.json", r#"{"command":"probe","seed":1,"params":{}}"#);
    assert_eq!(lab(&["sandwich", "--config", &mismatch]).status.code(), Some(1));

    let uncertified = write(
        &dir,
        "u.json",
        r#"{"command":"sandwich","seed":1,"params":{"function":{"type":"geometric_phi","functional":{"space":{"kind":"row","n":2},"phi":[0.6,0.6],"certified_norm":0.5}},"max_level":1,"budget":10}}"#,
    );
    assert_eq!(lab(&["sandwich", "--config", &uncertified]).status.code(), Some(1));
    assert_eq!(lab(&["sandwich", "--config", "/nonexistent.json"]).status.code(), Some(1));
}

#[test]
fn property_failures_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        &dir,
        "s.json",
        r#"{"command":"schwarz","seed":5,"params":{"function":{"type":"moebius","a":0.5},"upper":1.0,"max_level":2,"trials":40}}"#,
    );
    let out = dir.path().join("r.json");
    let o = lab(&["schwarz", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let rec: ResultRecord = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert!(!rec.passed);
    assert_eq!(rec.outputs["verdict"], "fail");
}

#[test]
fn report_rows_and_warnings() {
    let dir = tempfile::tempdir().unwrap();
    let o = lab(&["report"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&o.stdout).trim_end(), REPORT_HEADER.join(","));

    let mut records = Vec::new();
    for name in ["estimate_identity", "sandwich_moebius", "sandwich_geometric_min_linf"] {
        let cfg = common::configs_dir().join(format!("{name}.json"));
        let out = dir.path().join(format!("{name}.out.json"));
        let cmd = if name.starts_with("estimate") { "estimate" } else { "sandwich" };
        assert_eq!(lab(&[cmd, "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]).status.code(), Some(0));
        records.push(out.to_str().unwrap().to_owned());
    }
    records.push(write(&dir, "corrupt.json", "[1, 2"));
    let args: Vec<&str> = std::iter::once("report").chain(records.iter().map(String::as_str)).collect();
    let o = lab(&args);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stderr).contains("warning"));
    assert_eq!(String::from_utf8_lossy(&o.stdout).lines().count(), 4);
}
