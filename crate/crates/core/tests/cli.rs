use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_rigikit"));
    c.env_remove("RIGIKIT_SEED");
    c
}

fn run(args: &[&str], stdin: &str) -> Output {
    let mut child = bin()
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(stdin.as_bytes())
        .unwrap();
    child.wait_with_output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout)
        .unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

const K4: &str = "4 6\n0 1\n0 2\n0 3\n1 2\n1 3\n2 3\n";
const K4E: &str = "4 5\n0 2\n0 3\n1 2\n1 3\n2 3\n";
const K2X2: &str = r#"{"n": 2, "edges": [[0, 1], [0, 1]], "multi": true}"#;

#[test]
fn global_on_k4_is_globally_rigid() {
    let out = run(&["global", "--dim", "2", "--json"], K4);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["status"], "GloballyRigid");
    assert_eq!(v["seed"], 0);
    assert!(v["rules"]
        .as_array()
        .unwrap()
        .iter()
        .any(|r| r == "D2Characterization"));
}

#[test]
fn bodyhinge_global_on_double_edge() {
    let out = run(&["bodyhinge", "global", "--dim", "3", "--json"], K2X2);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["globally_rigid"], true);
    let per_edge = v["report"]["per_edge"].as_array().unwrap();
    assert!(!per_edge.is_empty());
    assert!(per_edge.iter().all(|p| p[1]["kind"] == "packed"));
}

#[test]
fn oracle_enumerate_finds_two_classes_for_k4_minus_edge() {
    let out = run(&["oracle", "enumerate", "--dim", "2", "--json"], K4E);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["class_count"], 2);
}

#[test]
fn malformed_input_exits_one_with_line_number() {
    let out = run(&["rank"], "3 2\n0 1\n0 x\n");
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
}

#[test]
fn parallel_edges_rejected_outside_multigraph_commands() {
    assert_eq!(run(&["rigid"], K2X2).status.code(), Some(1));
    assert_eq!(run(&["pack", "--trees", "2"], K2X2).status.code(), Some(0));
}

fn clique(vs: &[usize]) -> Vec<[usize; 2]> {
    let mut e = Vec::new();
    for (i, &a) in vs.iter().enumerate() {
        for &b in &vs[i + 1..] {
            e.push([a, b]);
        }
    }
    e
}

#[test]
fn combine_exit_codes() {
    let doc = |g2_edges: Vec<[usize; 2]>| {
        serde_json::json!({
            "g1": {"vertices": [0, 1, 2, 3, 4], "edges": clique(&[0, 1, 2, 3, 4])},
            "g2": {"vertices": [1, 2, 3, 4, 5], "edges": g2_edges},
            "minor": [[1, 2]],
            "x": [1, 2, 3, 4],
            "witness": {"assignment": [null, 1, 2, 3, 4, 1]},
        })
        .to_string()
    };
    let out = run(
        &["combine", "--dim", "3", "--json"],
        &doc(clique(&[1, 2, 3, 4, 5])),
    );
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["status"], "GloballyRigid");
    // the witness no longer realizes the minor edge: nothing can be concluded
    let out = run(
        &["combine", "--dim", "3", "--json"],
        &doc(vec![[1, 5], [3, 4]]),
    );
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["status"], "Unknown");
    let out = run(&["combine", "--dim", "3"], "{not json");
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn seed_flag_overrides_environment() {
    let mut c = bin();
    let out = c
        .args(["rigid", "--json", "--seed", "9"])
        .env("RIGIKIT_SEED", "7")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .and_then(|mut ch| {
            ch.stdin.take().unwrap().write_all(K4.as_bytes()).unwrap();
            ch.wait_with_output()
        })
        .unwrap();
    assert_eq!(json(&out)["seed"], 9);
    let mut c = bin();
    let out = c
        .args(["rigid", "--json"])
        .env("RIGIKIT_SEED", "7")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .and_then(|mut ch| {
            ch.stdin.take().unwrap().write_all(K4.as_bytes()).unwrap();
            ch.wait_with_output()
        })
        .unwrap();
    assert_eq!(json(&out)["seed"], 7);
}

#[test]
fn deterministic_reports_are_byte_identical() {
    let args = [
        "oracle",
        "enumerate",
        "--dim",
        "2",
        "--json",
        "--deterministic",
        "--seed",
        "4",
    ];
    let a = run(&args, K4E);
    let b = run(&args, K4E);
    assert_eq!(a.stdout, b.stdout);
    assert!(json(&a).get("generated_unix").is_none());
    assert!(json(&run(&["rigid", "--json"], K4))
        .get("generated_unix")
        .is_some());
}

#[test]
fn certificates_are_rechecked() {
    let ext = "5 8\n0 2\n0 3\n1 2\n1 3\n2 3\n4 0\n4 1\n4 2\n";
    let out = run(&["certify", "--deconstruct", "--json"], ext);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v = json(&out);
    assert_eq!(v["checked"], true);
    assert_eq!(v["status"], "GloballyRigid");
}

#[test]
fn builders_and_chains() {
    let out = run(
        &["kchain", "check", "--sizes", "6,6", "--dim", "3", "--json"],
        "",
    );
    assert_eq!(json(&out)["status"], "GloballyRigid");
    let out = run(
        &["extend", "--one", "--edge", "0,1", "--extra", "2", "--json"],
        K4,
    );
    assert_eq!(json(&out)["graph"]["n"], 5);
    let out = run(&["bodyhinge", "witness", "--dim", "3", "--json"], K2X2);
    assert_eq!(json(&out)["rigid"], true);
}

#[test]
fn graph_files_are_read_from_paths() {
    let dir = std::env::temp_dir().join(format!("rigikit-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path: PathBuf = dir.join("k4.txt");
    std::fs::write(&path, K4).unwrap();
    let out = bin()
        .args(["rank", "--json", path.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(json(&out)["generic_rank"], 5);
    let missing = bin()
        .args(["rank", dir.join("nope").to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(missing.status.code(), Some(1));
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn sweep_runs_clean() {
    let out = run(&["sweep", "--max-n", "5", "--json"], "");
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["failures"], 0);
}
