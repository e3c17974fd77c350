use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_omega-pac"))
}

fn run(args: &[&str], dir: &Path) -> Output {
    bin().args(args).current_dir(dir).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

const SKEWED: &str = r#"{
  "states": [{"name": "a", "accepting": true}, {"name": "b"}],
  "actions": ["go"],
  "initial": "a",
  "transitions": [["a", "go", "a", 0.5], ["a", "go", "b", 0.4], ["b", "go", "b", 1.0]]
}"#;

#[test]
fn solve_gridworld_product() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&run(&["export", "gridworld", "--out", "g.json"], dir.path())), 0);
    assert!(dir.path().join("g.automaton.json").exists());
    let o = run(&["solve", "--model", "g.json", "--automaton", "g.automaton.json"], dir.path());
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["initial_value"], 1.0);
    assert_eq!(v["states"].as_array().unwrap().len(), 11);
}

#[test]
fn chain_export_has_no_automaton_and_solves_to_one_half() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&run(&["export", "chain", "--n", "3", "--out", "c.json"], dir.path())), 0);
    assert!(!dir.path().join("c.automaton.json").exists());
    let v = json(&run(&["solve", "--model", "c.json"], dir.path()));
    assert_eq!(v["initial_value"], 0.5);
    assert_eq!(v["policy"][0], "jump");
}

#[test]
fn bad_rows_exit_two_unless_renormalized() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("m.json"), SKEWED).unwrap();
    let o = run(&["solve", "--model", "m.json"], dir.path());
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("m.json"));
    let o = run(&["solve", "--model", "m.json", "--renormalize"], dir.path());
    assert_eq!(code(&o), 0);
    assert_eq!(json(&o)["initial_value"], 0.0);
}

#[test]
fn missing_file_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&run(&["solve", "--model", "nope.json"], dir.path())), 1);
}

#[test]
fn learner_cap_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    run(&["export", "figure1", "--out", "f.json"], dir.path());
    let args = ["learn", "--model", "f.json", "--epsilon", "1/4", "--delta", "0.1", "--T", "5", "--k", "500"];
    let o = run(&[&args[..], &["--max-episodes", "3", "--out", "t.csv"]].concat(), dir.path());
    assert_eq!(code(&o), 3);
    let o = run(&[&args[..], &["--out", "t.csv"]].concat(), dir.path());
    assert_eq!(code(&o), 0);
    let trace = fs::read_to_string(dir.path().join("t.csv")).unwrap();
    assert!(trace.starts_with("episode,samples,unknown_visits,optimistic_value,true_policy_value,terminated"));
    assert!(trace.lines().last().unwrap().contains(",true"));
}

#[test]
fn invalid_parameters_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    run(&["export", "figure1", "--out", "f.json"], dir.path());
    let o = run(&["learn", "--model", "f.json", "--epsilon", "0.1", "--delta", "1.5", "--T", "5", "--k", "5"], dir.path());
    assert_eq!(code(&o), 2);
    let o = run(&["experiment", "figure1", "--k", "999999999999", "--runs", "1", "--out", "x"], dir.path());
    assert_eq!(code(&o), 2);
    let o = run(&["experiment", "figure1", "--p", "0", "--out", "x"], dir.path());
    assert_eq!(code(&o), 2);
    // clap usage errors also exit with 2
    assert_eq!(code(&run(&["solve"], dir.path())), 2);
}

#[test]
fn experiment_sweep_writes_one_row_per_k_and_run() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["experiment", "chain", "--k-sweep", "10,20,40", "--runs", "4", "--seed", "2", "--out", "out"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(dir.path().join("out/chain.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 3 * 4);
    assert!(!csv.lines().next().unwrap().contains("wall_time_s"));
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("out/chain_summary.json")).unwrap()).unwrap();
    assert_eq!(summary["k_values"], serde_json::json!([10, 20, 40]));
    assert_eq!(summary["reported_states"], 8);

    let o = run(&["experiment", "figure1", "--k-log", "4", "--runs", "2", "--timings", "--out", "f"], dir.path());
    assert_eq!(code(&o), 0);
    let csv = fs::read_to_string(dir.path().join("f/figure1.csv")).unwrap();
    assert!(csv.lines().next().unwrap().ends_with("wall_time_s"));
    assert_eq!(csv.lines().count(), 1 + 4 * 2);
}

#[test]
fn recurrence_modes() {
    let dir = tempfile::tempdir().unwrap();
    run(&["export", "figure1", "--p", "0.05", "--out", "f.json"], dir.path());
    fs::write(dir.path().join("b.json"), r#"["b", 0]"#).unwrap();
    let exact = json(&run(&["recurrence", "--model", "f.json", "--epsilon", "0.25"], dir.path()));
    assert_eq!(exact["t"], 29);
    assert_eq!(exact["exact"], true);
    let bound = json(&run(&["recurrence", "--model", "f.json", "--epsilon", "0.25", "--mode", "bound"], dir.path()));
    assert!(bound["t"].as_u64().unwrap() >= 29);
    let one = json(&run(&["recurrence", "--model", "f.json", "--epsilon", "0.25", "--policy", "b.json"], dir.path()));
    assert_eq!(one["t"], 29);
    let mc = run(&["recurrence", "--model", "f.json", "--epsilon", "0.25", "--policy", "b.json", "--mode", "mc"], dir.path());
    let t = json(&mc)["t"].as_u64().unwrap();
    assert!(t.abs_diff(29) <= 3, "{t}");
    fs::write(dir.path().join("bad.json"), r#"["b", "nope"]"#).unwrap();
    let o = run(&["recurrence", "--model", "f.json", "--epsilon", "0.25", "--policy", "bad.json"], dir.path());
    assert_eq!(code(&o), 2);
}

#[test]
fn estimate_defaults_to_optimal_policy() {
    let dir = tempfile::tempdir().unwrap();
    run(&["export", "chain", "--n", "4", "--out", "c.json"], dir.path());
    let v = json(&run(&["estimate", "--model", "c.json", "--epsilon", "0.05", "--delta", "0.1", "--seed", "4"], dir.path()));
    assert_eq!(v["samples"], 600);
    assert_eq!(v["exact_value"], 0.5);
    assert!((v["p_hat"].as_f64().unwrap() - 0.5).abs() <= 0.1);
}
