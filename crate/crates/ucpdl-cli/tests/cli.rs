use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str, body: &str) -> PathBuf {
    let path = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name);
    std::fs::write(&path, body).unwrap();
    path
}

fn chain2() -> PathBuf {
    fixture("chain2.json", r#"{"worlds":["w0","w1","w2"],"binary":{"a":[["w0","w1"],["w1","w2"]]}}"#)
}

fn chain1() -> PathBuf {
    fixture("chain1.json", r#"{"worlds":["v0","v1"],"binary":{"a":[["v0","v1"]]}}"#)
}

fn cpdlp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cpdlp")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json_lines(o: &Output) -> Vec<serde_json::Value> {
    stdout(o).lines().map(|l| serde_json::from_str(l).unwrap()).collect()
}

#[test]
fn eval_eps_prints_every_world() {
    let s = chain2();
    let o = cpdlp(&["eval", "<eps>", "-s", s.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json_lines(&o), vec![serde_json::json!({"worlds": ["w0", "w1", "w2"]})]);
}

#[test]
fn intersection_equals_conjunctive_program() {
    let s = chain2();
    let o = cpdlp(&["equiv", "a&b", "{a(x,y),b(x,y)}[x,y]", "-s", s.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json_lines(&o)[0]["equal"], true);
}

#[test]
fn inequivalent_programs_exit_one() {
    let s = chain2();
    let o = cpdlp(&["equiv", "a", "a;a", "--sort", "program", "-s", s.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn longer_chain_is_not_simulated() {
    let (a, b) = (chain2(), chain1());
    let o = cpdlp(&["game", "sim", "--k", "2", a.to_str().unwrap(), b.to_str().unwrap(), "--u", "w0", "--v", "v0"]);
    assert_eq!(o.status.code(), Some(1));
    let back = cpdlp(&["game", "sim", "--k", "2", b.to_str().unwrap(), a.to_str().unwrap(), "--u", "v0", "--v", "w0"]);
    assert_eq!(back.status.code(), Some(0));
}

#[test]
fn game_dump_ends_with_verdict() {
    let (a, b) = (chain1(), chain2());
    let o = cpdlp(&[
        "game", "bisim", "--k", "2", a.to_str().unwrap(), b.to_str().unwrap(), "--u", "v0", "--v", "w0", "--dump",
    ]);
    let lines = json_lines(&o);
    assert!(lines.len() > 1);
    assert!(lines[..lines.len() - 1].iter().all(|l| l.get("owner").is_some()));
    assert_eq!(lines.last().unwrap()["duplicator_wins"], false);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn point_queries() {
    let s = chain2();
    let p = s.to_str().unwrap();
    assert_eq!(cpdlp(&["eval", "<a;a>", "-s", p, "--at", "w0"]).status.code(), Some(0));
    assert_eq!(cpdlp(&["eval", "<a;a>", "-s", p, "--at", "w1"]).status.code(), Some(1));
    assert_eq!(cpdlp(&["eval", "a*", "-s", p, "--at", "w0", "--to", "w2"]).status.code(), Some(0));
    assert_eq!(cpdlp(&["eval", "a*", "-s", p, "--at", "w2", "--to", "w0"]).status.code(), Some(1));
}

#[test]
fn error_exit_codes() {
    let s = chain2();
    let p = s.to_str().unwrap();
    assert_eq!(cpdlp(&["parse", "<a"]).status.code(), Some(2));
    assert_eq!(cpdlp(&["parse", "$x"]).status.code(), Some(2));
    assert_eq!(cpdlp(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(cpdlp(&["parse", "loop(a)", "--dialect", "pdl"]).status.code(), Some(3));
    assert_eq!(cpdlp(&["eval", "<a>", "-s", p, "--at", "nowhere"]).status.code(), Some(3));
    let o = cpdlp(&["eval", "<U>", "-s", "/nonexistent.json"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!o.stderr.is_empty());
}

#[test]
fn budget_variable_caps_enumeration() {
    let o = Command::new(env!("CARGO_BIN_EXE_cpdlp"))
        .args(["split", "a*;b*", "--k", "3"])
        .env("CPDLP_BUDGET", "1")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn translations_round_trip_through_the_cli() {
    let o = cpdlp(&["translate", "loop(a)", "--from", "loopcpdl", "--to", "cpdlplus-loop"]);
    let conj = json_lines(&o)[0]["expr"].as_str().unwrap().to_string();
    assert_eq!(conj, "<{a(x,x)}[x,x]>");
    let back = cpdlp(&["translate", &conj, "--from", "cpdlplus-loop", "--to", "loopcpdl"]);
    assert_eq!(back.status.code(), Some(0));
    let none = cpdlp(&["translate", "p", "--from", "untc", "--to", "icpdl"]);
    assert_eq!(none.status.code(), Some(2));
}

#[test]
fn split_and_treetranslate() {
    let o = cpdlp(&["split", "a;b", "--k", "2"]);
    let splits: Vec<_> = json_lines(&o).into_iter().map(|l| l["split"].clone()).collect();
    assert!(splits.contains(&serde_json::json!(["a", "b"])));
    let t = cpdlp(&["treetranslate", "{a(x,y),b(x,y)}[x,y]"]);
    assert_eq!(t.status.code(), Some(0));
    assert!(json_lines(&t)[0]["program"].as_str().unwrap().contains("a & b"));
}

#[test]
fn unravel_exports_a_loadable_structure() {
    let s = chain2();
    let out = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("unravelled.json");
    let o = cpdlp(&[
        "unravel", s.to_str().unwrap(), "--world", "w0", "--k", "2", "--depth", "2", "--output", out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let line = &json_lines(&o)[0];
    assert!(line["decomposition"]["width"].as_u64().unwrap() <= 1);
    let reloaded = cpdlp(&["eval", "<eps>", "-s", out.to_str().unwrap()]);
    assert_eq!(reloaded.status.code(), Some(0));
}

#[test]
fn output_is_deterministic() {
    let s = chain2();
    let args = ["eval", "a*;-a*", "-s", s.to_str().unwrap()];
    assert_eq!(stdout(&cpdlp(&args)), stdout(&cpdlp(&args)));
    let t = ["translate", "<{a(x,y),b(y,z),c(z,x)}[x,y]>", "--from", "tw2", "--to", "icpdl"];
    assert_eq!(stdout(&cpdlp(&t)), stdout(&cpdlp(&t)));
}
