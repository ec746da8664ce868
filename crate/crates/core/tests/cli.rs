use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_polyblind")).args(args).output().expect("the binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", stdout(out)))
}

const WORKSPACE: &str = r#"{
  "morphisms": {"block": {"elements": ["1", "A", "B"], "identity": "1",
                          "table": [["1","A","B"],["A","A","B"],["B","B","B"]],
                          "letters": {"a": "A", "b": "B"}}},
  "machines": {
    "count_a": {"kind": "blind", "k": 1, "morphism": "block", "lambda": {"a": 1, "b": 0}},
    "count_b": {"kind": "blind", "k": 1, "morphism": "block", "lambda": {"a": 0, "b": 1}}
  },
  "series": {"ab": {"op": "hadamard", "args": [{"machine": "count_a"}, {"machine": "count_b"}]}}
}"#;

fn workspace(dir: &Path) -> String {
    let path = dir.join("ws.json");
    std::fs::write(&path, WORKSPACE).unwrap();
    path.display().to_string()
}

#[test]
fn eval_catalog_machines() {
    let out = run(&["eval", "nb_a", "aba"]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out).trim(), "2");
    let out = run(&["--json", "eval", "itpow2", "aaabaa"]);
    assert_eq!(json(&out)["value"], "13");
}

#[test]
fn unknown_machine_exits_with_two() {
    let out = run(&["eval", "no_such_machine", "ab"]);
    assert_eq!(code(&out), 2);
    assert!(!out.stderr.is_empty());
}

#[test]
fn bad_letter_exits_with_two() {
    assert_eq!(code(&run(&["eval", "nb_ab", "abz"])), 2);
}

#[test]
fn production_on_positions() {
    // The outer call at position 2 (a b) counts the a at position 1.
    let out = run(&["prod", "nb_ab", "ab", "1", "2"]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out).trim(), "1");
}

#[test]
fn workspace_machines_and_series() {
    let dir = tempfile::tempdir().unwrap();
    let ws = workspace(dir.path());
    let out = run(&["--workspace", &ws, "eval", "count_a", "abaab"]);
    assert_eq!(stdout(&out).trim(), "3");
    let out = run(&["--workspace", &ws, "series-eval", "ab", "abaab"]);
    assert_eq!(stdout(&out).trim(), "6");
    let spec = format!("{ws}#count_b");
    assert_eq!(stdout(&run(&["eval", &spec, "abaab"])).trim(), "2");
}

#[test]
fn conversions_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["convert", "blind-to-series", "nb_ab_blind"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let converted = dir.path().join("series.json");
    std::fs::write(&converted, &out.stdout).unwrap();
    let ws = converted.display().to_string();
    for w in ["", "ab", "aabbb", "babab"] {
        let direct = stdout(&run(&["eval", "nb_ab_blind", w]));
        let via = stdout(&run(&["--workspace", &ws, "series-eval", "main", w]));
        assert_eq!(direct, via, "{w:?}");
    }
    let ws = workspace(dir.path());
    let out = run(&["--workspace", &ws, "convert", "series-to-blind", "ab"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let machine = dir.path().join("machine.json");
    std::fs::write(&machine, &out.stdout).unwrap();
    let out = run(&["eval", &machine.display().to_string(), "abaab"]);
    assert_eq!(stdout(&out).trim(), "6");
}

#[test]
fn forest_commands() {
    let out = run(&["--json", "forest", "build", "signs", "aacacbbcbbbc"]);
    assert_eq!(code(&out), 0);
    let report = json(&out);
    assert!(report["height"].as_u64().unwrap() <= 9);
    let out = run(&["forest", "check", "signs", "<aa><c<a<cbbcb>>bbc>"]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    // a, a, b have images -1, -1, 0: not a valid idempotent node.
    assert_eq!(code(&run(&["forest", "check", "signs", "<aab>"])), 1);
    let out = run(&["forest", "dot", "signs", "<aa><c<a<cbbcb>>bbc>"]);
    assert!(stdout(&out).starts_with("digraph"));
}

#[test]
fn permutability_verdicts() {
    let out = run(&["--json", "decide", "permutable", "nb_ab"]);
    assert_eq!(code(&out), 0);
    let out = run(&["--json", "decide", "permutable", "itpow2", "--k-max-word", "1"]);
    assert_eq!(code(&out), 1);
    let report = json(&out);
    assert_ne!(report["counterexample"]["lhs"], report["counterexample"]["rhs"], "{report}");
}

#[test]
fn budget_is_enforced() {
    let out = run(&["decide", "permutable", "itpow2", "--k-max-word", "4", "--budget", "10"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("budget"));
}

#[test]
fn pumping_is_deterministic() {
    let args = ["--json", "--seed", "7", "decide", "pump", "itpow2", "--k", "1", "--omega", "1"];
    let first = run(&args);
    assert_eq!(code(&first), 1);
    let mut single = vec!["--jobs", "1"];
    single.extend_from_slice(&args);
    let second = run(&single);
    assert_eq!(first.stdout, second.stdout);
    let unary = run(&["--json", "decide", "pump", "nb_a", "--k", "1", "--omega", "1", "--attempts", "20"]);
    assert_eq!(code(&unary), 0);
}

#[test]
fn decomposition_report() {
    let out = run(&["--json", "decide", "decompose", "nb_ab", "aaaaaaaabbbbbbbb", "--verify"]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    let r = json(&out);
    let n = |k: &str| r[k].as_str().unwrap().parse::<u128>().unwrap();
    assert_eq!(n("f"), 64);
    assert_eq!(n("f_prime") + n("f_second"), 64);
    assert_eq!(r["holds"], true);
    let out = run(&["decide", "decompose", "itpow2", "aab"]);
    assert_eq!(code(&out), 1);
}

#[test]
fn architecture_counts() {
    let out = run(&["--json", "decide", "counts", "<aa><c<a<cbbcb>>bbc>", "--morphism", "signs", "--k", "1"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(!stdout(&out).trim().is_empty());
}
