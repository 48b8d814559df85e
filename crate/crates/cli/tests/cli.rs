//! End-to-end runs of the `stochvc` binary.

use std::path::Path;
use std::process::{Command, Output};

use stochvc::parse_edge_list_str;

fn stochvc(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stochvc"))
        .arg("--out-dir")
        .arg(dir)
        .args(args)
        .output()
        .unwrap()
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap()
}

/// Data rows of a CSV written by the tool, split into fields.
fn csv_rows(text: &str) -> Vec<Vec<String>> {
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# config: {"));
    let body = lines.collect::<Vec<_>>().join("\n");
    let mut reader = csv::Reader::from_reader(body.as_bytes());
    reader
        .records()
        .map(|r| r.unwrap().iter().map(str::to_string).collect())
        .collect::<Vec<_>>()
}

#[test]
fn certain_edges_on_a_clique_give_ratio_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = stochvc(dir.path(), &["run-vc", "--gen", "clique(4)", "--p", "1", "--epsilon", "0.1", "--runs", "5"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let doc: serde_json::Value = serde_json::from_str(&read(dir.path(), "run_vc.json")).unwrap();
    assert_eq!(doc["result"]["ratio"], 1.0);
    assert_eq!(doc["result"]["passed"], true);
    assert_eq!(doc["config"]["command"], "run-vc");
    let rows = csv_rows(&read(dir.path(), "run_vc.csv"));
    assert_eq!(rows.len(), 5);
    assert!(rows.iter().all(|r| r[2] == "3" && r[3] == "0"));
}

#[test]
fn missing_graph_file_is_named_in_the_error() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.txt");
    let out = stochvc(dir.path(), &["run-vc", "--graph", missing.to_str().unwrap(), "--p", "0.5", "--epsilon", "0.1"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("nope.txt"));
}

#[test]
fn malformed_graph_reports_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.txt");
    std::fs::write(&path, "3\n0 1\n2 2\n").unwrap();
    let out = stochvc(dir.path(), &["estimate-opt", "--graph", path.to_str().unwrap(), "--p", "0.5"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
}

#[test]
fn bad_parameters_are_rejected_before_running() {
    let dir = tempfile::tempdir().unwrap();
    let out = stochvc(dir.path(), &["run-vc", "--gen", "star(3)", "--p", "0.5", "--epsilon", "0.3"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("epsilon"));
    let out = stochvc(dir.path(), &["estimate-opt", "--gen", "hypercube(3)", "--p", "0.5"]);
    assert!(!out.status.success());
}

#[test]
fn generated_graphs_are_reproducible_and_parse_back() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        let out = stochvc(dir.path(), &["--seed", "9", "generate", "--gen", "erdos_renyi(12, 0.4)"]);
        assert!(out.status.success());
    }
    let text = read(a.path(), "graph_0.txt");
    let g = parse_edge_list_str(&text).unwrap();
    assert_eq!(g.n(), 12);
    let strip = |t: &str| t.lines().skip(1).collect::<Vec<_>>().join("\n");
    assert_eq!(strip(&text), strip(&read(b.path(), "graph_0.txt")));
}

#[test]
fn estimate_opt_rows_sum_to_opt() {
    let dir = tempfile::tempdir().unwrap();
    let out = stochvc(dir.path(), &["estimate-opt", "--gen", "planted_seed_instance", "--p", "0.5"]);
    assert!(out.status.success());
    let rows = csv_rows(&read(dir.path(), "estimate_opt.csv"));
    assert_eq!(rows.len(), 17);
    let last = rows.last().unwrap();
    assert_eq!(last[0], "opt");
    let total: f64 = rows[..16].iter().map(|r| r[1].parse::<f64>().unwrap()).sum();
    assert!((total - last[1].parse::<f64>().unwrap()).abs() < 1e-9);
    // Spokes are covered unless neither leaf edge is realized.
    assert_eq!(rows[1][1], "0.75");
}

#[test]
fn compare_baselines() {
    let dir = tempfile::tempdir().unwrap();
    let out = stochvc(dir.path(), &["compare", "--gen", "clique(5)", "--p", "1", "--epsilon", "0.1", "--runs", "10"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = csv_rows(&read(dir.path(), "compare.csv"));
    let by_name = |s: &str| rows.iter().find(|r| r[0] == s).unwrap().clone();
    let all = by_name("query-all");
    assert_eq!((all[2].as_str(), all[6].as_str()), ("true", "1.0"));
    let commit_v = by_name("commit-V");
    assert_eq!(commit_v[5], "0.0");
    assert_eq!(commit_v[6].parse::<f64>().unwrap(), 5.0 / 4.0);
}

#[test]
fn seed_trace_picks_the_planted_hub() {
    let dir = tempfile::tempdir().unwrap();
    let out = stochvc(
        dir.path(),
        &["seed-trace", "--gen", "planted_seed_instance(5, 2)", "--p", "0.5", "--epsilon", "0.1", "--gamma", "0.4"],
    );
    assert!(out.status.success());
    let lines: Vec<serde_json::Value> =
        read(dir.path(), "seed_trace.jsonl").lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert!(lines[0]["config"].is_object());
    assert_eq!(lines[1]["chosen"], 0);
    assert!(lines.last().unwrap()["chosen"].is_null());
}

#[test]
fn concentration_uses_the_given_grid() {
    let dir = tempfile::tempdir().unwrap();
    let out = stochvc(
        dir.path(),
        &["--trials", "2000", "concentration", "--gen", "disjoint_edges(30)", "--p", "0.5", "--t-grid", "0,3,6"],
    );
    assert!(out.status.success());
    let rows = csv_rows(&read(dir.path(), "concentration.csv"));
    let ts: Vec<&str> = rows.iter().map(|r| r[1].as_str()).collect();
    assert_eq!(ts, ["0.0", "3.0", "6.0"]);
    assert!(rows.iter().all(|r| r[7] == "true"));
}

#[test]
fn structural_check_repeats_random_instances() {
    let dir = tempfile::tempdir().unwrap();
    let out = stochvc(
        dir.path(),
        &["--trials", "300", "structural-check", "--gen", "erdos_renyi(10, 0.4)", "--repeat", "3", "--p", "0.5"],
    );
    assert!(out.status.success());
    let rows = csv_rows(&read(dir.path(), "structural_check.csv"));
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r[10] == "true"));
}
