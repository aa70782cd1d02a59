use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use distbap::fixtures::{merge_scenario_graph, ranked_square};
use distbap::instance::{read_instance, write_instance};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_distbap"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn ranked_file(dir: &Path) -> PathBuf {
    let path = dir.join("ranked.json");
    write_instance(&ranked_square(), &path).unwrap();
    path
}

#[test]
fn solve_reports_the_bottleneck() {
    let dir = tempfile::tempdir().unwrap();
    let inst = ranked_file(dir.path());
    let trace = dir.path().join("trace.csv");
    let out = run(&[
        "solve",
        "--instance",
        inst.to_str().unwrap(),
        "--strategy",
        "dfs",
        "--topology",
        "path",
        "--verify",
        "--out",
        trace.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = stdout(&out);
    assert!(text.contains("bottleneck 6\n"), "{text}");
    assert!(text.contains("iterations 3\n"), "{text}");
    let csv = std::fs::read_to_string(trace).unwrap();
    assert_eq!(csv.lines().count(), 4);
}

#[test]
fn oracle_agrees_with_solve() {
    let dir = tempfile::tempdir().unwrap();
    let inst = ranked_file(dir.path());
    let out = run(&["oracle", "--instance", inst.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(stdout(&out).starts_with("bottleneck 6\n"));
}

#[test]
fn gen_writes_a_readable_instance() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.json");
    let out = run(&[
        "gen",
        "--n",
        "5",
        "--m",
        "7",
        "--dist",
        "two-clusters",
        "--seed",
        "3",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let g = read_instance(&path).unwrap();
    assert_eq!((g.agent_count(), g.task_count()), (7, 5));
    let again = run(&[
        "gen",
        "--n",
        "5",
        "--m",
        "7",
        "--dist",
        "two-clusters",
        "--seed",
        "3",
    ]);
    assert_eq!(
        stdout(&again).trim_end(),
        std::fs::read_to_string(&path).unwrap()
    );
}

#[test]
fn experiment_is_reproducible() {
    let args = [
        "experiment",
        "--name",
        "optimgap",
        "--n",
        "4:12:4",
        "--trials",
        "3",
        "--seed",
        "5",
    ];
    let first = run(&args);
    let second = run(&args);
    assert!(first.status.success());
    assert_eq!(first.stdout, second.stdout);
    // Header plus one row per (n, trial).
    assert_eq!(stdout(&first).lines().count(), 1 + 3 * 3);
}

#[test]
fn merge_writes_a_report() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("merge.json");
    write_instance(&merge_scenario_graph(), &inst).unwrap();
    let g = merge_scenario_graph();
    let agents: Vec<String> = (0..g.agent_count() / 2).map(|i| i.to_string()).collect();
    let tasks: Vec<String> = (0..g.task_count() / 2).map(|j| j.to_string()).collect();
    let out = run(&[
        "merge",
        "--instance",
        inst.to_str().unwrap(),
        "--split-agents",
        &agents.join(","),
        "--split-tasks",
        &tasks.join(","),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(report.get("decision").is_some(), "{report}");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&["solve", "--bogus"]).status.code(), Some(2));
    let missing = dir.path().join("missing.json");
    assert_eq!(
        run(&["oracle", "--instance", missing.to_str().unwrap()])
            .status
            .code(),
        Some(1)
    );
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"m\": 1}").unwrap();
    let out = run(&["solve", "--instance", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error: "));
    let inst = ranked_file(dir.path());
    let out = run(&[
        "solve",
        "--instance",
        inst.to_str().unwrap(),
        "--topology",
        "torus",
    ]);
    assert_eq!(out.status.code(), Some(2));
}
