use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn game(name: &str) -> String {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../games").join(name);
    p.to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_riskaverse")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn records(out: &Output) -> Vec<Value> {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    stdout(out).lines().map(|l| serde_json::from_str(l).unwrap()).collect()
}

#[test]
fn tensor_csv_for_example2() {
    let out = run(&["tensor", &game("example2.game")]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(text.lines().next(), Some("player,s1,s2,value"));
    let row = text.lines().find(|l| l.starts_with("2,D,L,")).unwrap();
    let v: f64 = row.rsplit(',').next().unwrap().parse().unwrap();
    assert!((v - 1.0).abs() < 5e-3);
}

#[test]
fn pure_rae_of_example1() {
    let recs = records(&run(&["solve", "--concept", "rae", "--kind", "pure", &game("example1.game")]));
    assert_eq!(recs.len(), 1);
    assert_eq!(recs[0]["concept"], "RAE");
    assert_eq!(recs[0]["kind"], "pure");
    assert_eq!(recs[0]["profile"], serde_json::json!(["U", "R"]));
}

#[test]
fn mixed_rae_of_example2() {
    let recs = records(&run(&["--raw", "solve", "--concept", "rae", "--kind", "mixed", &game("example2.game")]));
    assert_eq!(recs.len(), 1);
    for mix in recs[0]["profile"].as_array().unwrap() {
        let first = mix.as_object().unwrap().values().next().unwrap().as_f64().unwrap();
        assert!((first - 5.0 / 6.0).abs() < 1e-6, "{mix}");
    }
}

#[test]
fn default_output_is_rounded() {
    let recs = records(&run(&["solve", "--kind", "mixed", &game("example2.game")]));
    assert_eq!(recs[0]["profile"][0]["U"], 0.833333);
}

#[test]
fn nash_and_rae2() {
    let nash = records(&run(&["nash", "--kind", "pure", &game("example2.game")]));
    assert_eq!(nash.len(), 1);
    assert_eq!(nash[0]["profile"], serde_json::json!(["U", "L"]));
    let rae2 = records(&run(&["--raw", "solve", "--concept", "rae2", "--kind", "mixed", &game("example2.game")]));
    let u = rae2[0]["profile"][0]["U"].as_f64().unwrap();
    assert!((u - (-5.0 + 45f64.sqrt()) / 2.0).abs() < 1e-3);
}

#[test]
fn dominance_and_elimination() {
    let flagged = records(&run(&["dominate", &game("example2.game")]));
    assert!(flagged.is_empty());
    let trace = records(&run(&["dominate", "--eliminate", &game("example1.game")]));
    assert_eq!(trace.len(), 3);
    assert_eq!(trace[2]["remaining"], serde_json::json!([["U"], ["R"]]));
}

#[test]
fn commit_single_round_matches_base() {
    let recs = records(&run(&["commit", "-M", "1", "--kind", "pure", &game("example1.game")]));
    assert_eq!(recs.len(), 1);
    assert_eq!(recs[0]["concept"], "RAE_M");
    assert_eq!(recs[0]["profile"], serde_json::json!(["U", "R"]));
}

#[test]
fn simulate_is_reproducible() {
    let args = ["simulate", &game("example4.game"), "--param", "a=5", "--rounds", "20000", "--seed", "7"];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(stdout(&a), stdout(&b));
    let text = stdout(&a);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("param,concept_a,concept_b,rounds,wins,ties,proportion,ci3"));
    assert!(lines.next().unwrap().starts_with(",rae:pure,nash:pure,20000,"));
}

#[test]
fn simulate_sweep_rows() {
    let out = run(&[
        "simulate",
        &game("example4.game"),
        "--experiment",
        "indifference",
        "--player",
        "2",
        "--rounds",
        "5000",
        "--sweep",
        "a=0:2:0.5",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    let params: Vec<&str> = text.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(params, ["0", "0.5", "1", "1.5", "2"]);
    let empty = run(&["simulate", &game("example4.game"), "--rounds", "10", "--sweep", "a=2:1:0.5"]);
    assert_eq!(stdout(&empty).lines().count(), 1);
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["solve", "does-not-exist.game"]).status.code(), Some(1));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(&["solve", &game("example4.game"), "--param", "zz=1"]).status.code(), Some(1));
    let coarse = run(&["commit", "-M", "2", "--grid-step", "0.5", &game("example1.game")]);
    assert_eq!(coarse.status.code(), Some(2));
    assert!(!coarse.stderr.is_empty());
    let no_root = run(&["solve", "--concept", "rae2", "--kind", "mixed", &game("example1.game")]);
    assert_eq!(no_root.status.code(), Some(2));
}

#[test]
fn missing_profile_is_a_validation_error() {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    let path = dir.join("missing_cell.game");
    std::fs::write(
        &path,
        r#"{"players": [{"labels": ["U", "D"]}],
            "payoffs": [{"player": 1, "profile": ["U"], "dist": {"atoms": [{"value": 1, "prob": 1}]}}]}"#,
    )
    .unwrap();
    let out = run(&["tensor", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("player 1 at (D)"));
}
