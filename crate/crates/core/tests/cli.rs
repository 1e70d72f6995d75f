use std::process::{Command, Output};

use pakebench::harness::SessionReport;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pakebench"))
        .args(args)
        .env_remove("PAKE_LOG")
        .env_remove("RUST_LOG")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn params_gen_and_check() {
    let a = run(&["params", "gen", "--bits", "16", "--seed", "3"]);
    let b = run(&["params", "gen", "--bits", "16", "--seed", "3"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(stdout(&a).lines().count(), 2);

    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("p.txt");
    let o = run(&["params", "gen", "--bits", "12", "--seed", "1", "--out", file.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(run(&["params", "check", file.to_str().unwrap()]).status.success());

    std::fs::write(&file, "13\n5\n").unwrap();
    let o = run(&["params", "check", file.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("generate"));
    std::fs::write(&file, "15\n2\n").unwrap();
    assert_eq!(run(&["params", "check", file.to_str().unwrap()]).status.code(), Some(3));
    assert_eq!(run(&["params", "check", "/nonexistent/p.txt"]).status.code(), Some(3));
}

#[test]
fn register_writes_store() {
    let dir = tempfile::tempdir().unwrap();
    let store = dir.path().join("v.txt");
    let s = store.to_str().unwrap();
    let o = run(&["register", "--id-a", "9", "--id-b", "12", "--password", "10", "--store", s]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(std::fs::read_to_string(&store).unwrap(), "# pake-verifiers v1\n9\t12\t7\n");
    let o = run(&["register", "--id-a", "9", "--id-b", "12", "--password", "11", "--store", s]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("duplicate"));
    std::fs::write(&store, "9\t12\t7\n").unwrap();
    let o = run(&["register", "--id-a", "1", "--id-b", "2", "--password", "3", "--store", s]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("line 1"));
}

#[test]
fn simulate_example_run() {
    let o = run(&["simulate", "--scheme", "proposed", "--x", "3", "--y", "4", "--json"]);
    assert!(o.status.success());
    let r: SessionReport = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(r.key_a.unwrap(), 9u32.into());
    let o = run(&["simulate", "--scheme", "lky", "--x", "3", "--y", "4"]);
    assert!(stdout(&o).contains("key_A 1  key_B 1"));
    let o = run(&["simulate", "--x", "5", "--y", "7", "--client-password", "11"]);
    assert_eq!(o.status.code(), Some(1));
    let o = run(&["simulate", "--seed", "4", "--id-a", "alice", "--id-b", "bob", "--password", "hunter2"]);
    assert!(o.status.success(), "{}", stderr(&o));
}

#[test]
fn simulate_appends_to_pake_log() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("log.jsonl");
    for _ in 0..2 {
        let o = Command::new(env!("CARGO_BIN_EXE_pakebench"))
            .args(["simulate", "--x", "3", "--y", "4"])
            .env("PAKE_LOG", &log)
            .output()
            .unwrap();
        assert!(o.status.success());
    }
    let text = std::fs::read_to_string(&log).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0], lines[1]);
}

#[test]
fn attacks_from_cli() {
    let o = run(&["attack", "stolen-verifier-lky", "--x", "5", "--y", "4"]);
    assert!(stdout(&o).contains("verdict: attack succeeded"));
    let o = run(&["attack", "stolen-verifier-proposed", "--x", "3", "--y", "5", "--verifier", "6"]);
    assert!(stdout(&o).contains("verdict: attack failed"));
    assert!(stdout(&o).contains("claimed: resists stolen-verifier"));
    let o = run(&["attack", "mitm", "--field", "T_A", "--value", "6", "--x", "3", "--y", "4"]);
    assert!(stdout(&o).contains("verdict: attack failed"));
    let o = run(&["attack", "mitm", "--scheme", "lky", "--field", "E_B", "--value", "6", "--x", "3", "--y", "4"]);
    assert_eq!(o.status.code(), Some(3));
    let o = run(&["attack", "census", "--dictionary", "10,11", "--x", "3", "--y", "4", "--json"]);
    let v: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(v["consistent"], serde_json::json!(["10"]));
    let o = run(&["attack", "mitm", "--field", "X", "--value", "1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bench_and_golden() {
    let o = run(&["bench", "--trials", "10", "--seed", "1", "--csv"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.starts_with("scheme,metric,measured,paper_claim\n"));
    assert!(out.contains("proposed,round_trips,2,2 rounds"));
    let o = run(&["golden"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).matches("ok ").count(), 4);
}

#[test]
fn connect_without_server() {
    let o = run(&["connect", "--addr", "127.0.0.1:1", "--id-a", "9", "--id-b", "12", "--password", "10"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("cannot connect"));
}
