use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn zxcliff(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_zxcliff")).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn optimize_writes_circuit_and_trace() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "in.txt", "qubits 2\nH 0\nCNOT 0 1\nCNOT 0 1\nH 0\nS 1\nS 1\n");
    let out = dir.path().join("out.txt");
    let trace = dir.path().join("trace.json");
    let o = zxcliff(&[
        "optimize",
        &input,
        "--out",
        out.to_str().unwrap(),
        "--trace",
        trace.to_str().unwrap(),
        "--verify",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&out).unwrap();
    assert_eq!(text, "qubits 2\nZ 1\n");
    let t: serde_json::Value = serde_json::from_str(&fs::read_to_string(&trace).unwrap()).unwrap();
    assert!(t["steps"].is_array() && t["initial"].is_object() && t["final"].is_object());

    let v = zxcliff(&["verify", &input, out.to_str().unwrap()]);
    assert!(v.status.success());
    assert_eq!(String::from_utf8_lossy(&v.stdout).trim(), "true");
}

#[test]
fn verify_reports_inequivalence() {
    let dir = tempfile::tempdir().unwrap();
    let s = write(dir.path(), "s.txt", "qubits 1\nS 0\n");
    let v = write(dir.path(), "v.txt", "qubits 1\nV 0\n");
    let hh = write(dir.path(), "hh.txt", "qubits 1\nH 0\nH 0\n");
    let empty = write(dir.path(), "e.txt", "qubits 1\n");
    assert_eq!(zxcliff(&["verify", &s, &v]).status.code(), Some(3));
    assert!(zxcliff(&["verify", &hh, &empty]).status.success());
}

#[test]
fn extract_requires_a_flow_only_when_asked() {
    let dir = tempfile::tempdir().unwrap();
    // Two inputs, one output.
    let bad = r#"{"vertices":[{"id":0,"kind":"B"},{"id":1,"kind":"B"},{"id":2,"kind":"Z","phase":0},{"id":3,"kind":"B"}],
        "edges":[[0,2],[1,2],[2,3]],"inputs":[0,1],"outputs":[3]}"#;
    let p = write(dir.path(), "bad.json", bad);
    assert_eq!(zxcliff(&["extract", &p, "--require-flow"]).status.code(), Some(2));
    assert!(zxcliff(&["extract", &p]).status.success());
}

#[test]
fn translate_then_extract_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let c = write(dir.path(), "c.txt", "qubits 2\nS 0\nCNOT 0 1\nV 1\n");
    let t = zxcliff(&["translate", &c]);
    assert!(t.status.success());
    let d = write(dir.path(), "d.json", &String::from_utf8(t.stdout).unwrap());
    let e = zxcliff(&["extract", &d, "--require-flow"]);
    assert!(e.status.success());
    let back = write(dir.path(), "back.txt", &String::from_utf8(e.stdout).unwrap());
    assert!(zxcliff(&["verify", &c, &back]).status.success());
}

#[test]
fn bench_csv_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("r.csv");
    let args = ["--seed", "5", "--jobs", "2", "bench", "--width", "1,2", "--count", "4", "--depth", "10"];
    let o = zxcliff(&[&args[..], &["--csv", csv.to_str().unwrap()]].concat());
    assert!(o.status.success());
    let text = fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("width,depth,count,seed,mean_in,mean_out,ratio,steps,ms_mean,ms_sigma,verified")
    );
    assert_eq!(lines.count(), 2);

    let strip = |o: Output| {
        let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
        v.as_array()
            .unwrap()
            .iter()
            .map(|r| (r["mean_in"].clone(), r["mean_out"].clone(), r["steps"].clone(), r["verified"].clone()))
            .collect::<Vec<_>>()
    };
    let a = strip(zxcliff(&[&["--json"], &args[..]].concat()));
    let b = strip(zxcliff(&[&["--json"], &args[..]].concat()));
    assert_eq!(a, b);
}

#[test]
fn rules_check_and_nf_dump() {
    let o = zxcliff(&["--json", "rules", "check"]);
    assert!(o.status.success());
    let rows: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(rows.as_array().unwrap().iter().all(|r| r["sound"] == true));

    let o = zxcliff(&["nf", "dump"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["cc1"].as_array().unwrap().len(), 24);
    assert_eq!(v["cc2_members"], 11520);
}

#[test]
fn malformed_circuit_is_a_plain_failure() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.txt", "qubits 1\nCNOT 0 0\n");
    assert_eq!(zxcliff(&["optimize", &bad]).status.code(), Some(1));
}
