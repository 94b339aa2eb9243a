use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_qresb"))
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn cfg(name: &str) -> String {
    configs().join(name).to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn data_rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("t,"))
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn reproduce_table_csv() {
    let o = run(&["reproduce-table", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("# critical_tax=5.0000000000000000e-1\n"));
    assert!(text.contains("beta=0.3836"));
    let rows = data_rows(&text);
    assert_eq!(rows.len(), 4);
    for (row, want) in rows.iter().zip([0.78, 0.50, 0.22, 0.0]) {
        let p: f64 = row[1].parse().unwrap();
        assert!((p - want).abs() <= 0.01, "{row:?}");
    }
    assert_eq!(rows[3][0], "deletion");
    assert_eq!(rows[3][2].parse::<f64>().unwrap(), 7.0);
    assert!(!text.contains('\r'));
}

#[test]
fn reproduce_table_layout() {
    let o = run(&["reproduce-table"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("p_t"));
    assert!(text.contains("0.5          0.50"));
    assert!(text.contains("deletion     0.00   7.00"));
}

#[test]
fn reproduce_table_svg_requires_out() {
    assert_eq!(run(&["reproduce-table", "--svg"]).status.code(), Some(1));
}

#[test]
fn sweep_empty_list_with_deletion() {
    let o = run(&["sweep-tax", "--game", &cfg("coordination_game.json"), "--taxes", "", "--deletion"]);
    assert_eq!(o.status.code(), Some(0));
    let rows = data_rows(&stdout(&o));
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][0], "deletion");
}

#[test]
fn sweep_unsorted_taxes() {
    let o = run(&["sweep-tax", "--game", &cfg("coordination_game.json"), "--taxes", "1,0.5"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("ascending"));
}

#[test]
fn sweep_writes_files_and_overrides_apply() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_string_lossy().into_owned();
    let o = run(&[
        "sweep-tax",
        "--game",
        &cfg("coordination_params.json"),
        "--beta",
        "0.3836",
        "--taxes",
        "0,0.5,1",
        "--out",
        &out,
        "--svg",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let csv = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert!(csv.contains("beta=0.3836"));
    assert_eq!(data_rows(&csv)[1][1], "5.0000000000000000e-1");
    let svg = fs::read_to_string(dir.path().join("sweep.svg")).unwrap();
    assert!(svg.contains("stroke-dasharray"));
}

#[test]
fn solve_at_critical_tax() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_string_lossy().into_owned();
    let o = run(&["solve", "--game", &cfg("coordination_game.json"), "--tax", "0.5", "--out", &out]);
    assert_eq!(o.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("solve.json")).unwrap()).unwrap();
    let p = doc["profile"]["1"]["X"].as_f64().unwrap();
    assert!((p - 0.5).abs() <= 1e-9);
    assert_eq!(doc["config"]["kappa"][0].as_f64(), Some(1.5));
    assert_eq!(doc["unique_certified"].as_bool(), Some(true));
}

#[test]
fn solve_single_action_game() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.json");
    fs::write(
        &path,
        r#"{"players": ["1"], "actions": {"1": ["only"]},
            "payoffs": [{"profile": {"1": "only"}, "values": {"1": 3}}]}"#,
    )
    .unwrap();
    let o = run(&["solve", "--game", path.to_str().unwrap(), "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("1,only,1.0000000000000000e0"));
}

#[test]
fn solve_truncated_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.json");
    let full = fs::read_to_string(configs().join("coordination_game.json")).unwrap();
    fs::write(&path, &full[..full.len() / 2]).unwrap();
    let o = run(&["solve", "--game", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line"));
}

#[test]
fn solve_missing_field() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.json");
    fs::write(&path, r#"{"players": ["1"], "actions": {"1": ["a"]}}"#).unwrap();
    let o = run(&["solve", "--game", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("payoffs"));
}

#[test]
fn solve_non_convergence() {
    let o = run(&["solve", "--game", &cfg("coordination_game.json"), "--max-iter", "0"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn solve_rejects_negative_beta() {
    let o = run(&["solve", "--game", &cfg("coordination_game.json"), "--beta=-1"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn statics_pass_lines() {
    let o = run(&["comparative-statics", "--game", &cfg("coordination_params.json")]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text.lines().filter(|l| l.ends_with(" PASS")).count(), 4);
}

#[test]
fn statics_contraction_violated() {
    let o = run(&["comparative-statics", "--game", &cfg("coordination_params.json"), "--beta", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("= 10 >= 4"));
}

#[test]
fn statics_degenerate() {
    let o = run(&["comparative-statics", "--game", &cfg("coordination_params.json"), "--beta", "0"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).matches("degenerate PASS").count(), 4);
}

fn section<'a>(text: &'a str, title: &str) -> Vec<&'a str> {
    text.lines()
        .skip_while(|l| !l.starts_with(title))
        .skip(1)
        .take_while(|l| l.starts_with("  "))
        .collect()
}

#[test]
fn meta_blocking_instance() {
    let o = run(&["meta", "--meta", &cfg("blocking.json")]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let approve_all = "(Approve, Approve)";
    assert!(section(&text, "Meta-Nash").iter().any(|l| l.contains(approve_all)));
    assert!(!section(&text, "Hyper-Meta-Nash").iter().any(|l| l.contains(approve_all)));
    assert!(text.contains("blocking, player 1: blocks"));
    assert!(text.contains("blocking, player 2: does not block"));
}

#[test]
fn meta_zero_weights_lists_coincide() {
    let o = run(&["meta", "--meta", &cfg("reform_costs.json")]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let meta = section(&text, "Meta-Nash");
    let hyper = section(&text, "Hyper-Meta-Nash");
    assert_eq!(meta, hyper);
    assert!(meta.iter().any(|l| l.contains("(Approve, Approve)")));
    assert!(text.contains("all-Approve is Meta-Nash: yes"));
}

#[test]
fn meta_example_configs_run() {
    for name in ["delete_vote.json", "climate.json", "platform.json"] {
        let o = run(&["meta", "--meta", &cfg(name)]);
        assert_eq!(o.status.code(), Some(0), "{name}: {}", stderr(&o));
    }
}

#[test]
fn meta_capacity_guard() {
    let o = bin()
        .args(["meta", "--meta", &cfg("blocking.json")])
        .env("METAGAME_MAX_PROFILES", "3")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    let o = bin()
        .args(["meta", "--meta", &cfg("blocking.json")])
        .env("METAGAME_MAX_PROFILES", "many")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn meta_infeasible_reform() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.json");
    fs::write(
        &path,
        r#"{"abstract_reform": {"status_quo": [0], "reform": [1]},
            "rule": {"type": "unanimity"}}"#,
    )
    .unwrap();
    assert_eq!(run(&["meta", "--meta", path.to_str().unwrap()]).status.code(), Some(0));
    fs::write(
        &path,
        r#"{"game": {"players": ["1"], "actions": {"1": ["only"]},
                     "payoffs": [{"profile": {"1": "only"}, "values": {"1": 3}}]},
            "rule": {"type": "unanimity", "reform": [{"type": "delete", "player": "1", "action": "only"}]}}"#,
    )
    .unwrap();
    let o = run(&["meta", "--meta", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("infeasible"));
}

#[test]
fn meta_writes_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_string_lossy().into_owned();
    let o = run(&["meta", "--meta", &cfg("blocking.json"), "--out", &out]);
    assert_eq!(o.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("meta.json")).unwrap()).unwrap();
    assert_eq!(doc["meta_nash"].as_array().unwrap().len(), 2);
    assert_eq!(doc["hyper_meta_nash"][0]["h"].as_array().unwrap().len(), 2);
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(run(&["bogus"]).status.code(), Some(1));
    assert_eq!(run(&["solve"]).status.code(), Some(1));
    assert_eq!(run(&["sweep-tax", "--game", &cfg("coordination_game.json"), "--taxes", "0,x"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}
