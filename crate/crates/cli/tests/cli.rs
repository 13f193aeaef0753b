//! The `grip` binary: outputs and exit codes.

use std::path::PathBuf;
use std::process::{Command, Output};

fn corpus(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../core/corpus")
        .join(name)
        .display()
        .to_string()
}

fn grip(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_grip")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn check_accepts_the_mult_corpus() {
    let o = grip(&["check", &corpus("mult.grip")]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("mult_L : List Nat -> Nat"));
}

#[test]
fn check_in_the_fragment_rejects_large_elimination() {
    assert_eq!(code(&grip(&["check", &corpus("narrow.grip")])), 0);
    let o = grip(&["check", "--grip-up", &corpus("narrow.grip")]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("GripUpViolation"));
}

#[test]
fn missing_files_and_bad_arguments_are_usage_errors() {
    assert_eq!(code(&grip(&["check", "no/such/file.grip"])), 2);
    assert_eq!(code(&grip(&["prec", "type", "Nat ->", "Nat"])), 2);
    assert_eq!(code(&grip(&["frobnicate"])), 2);
    assert_eq!(code(&grip(&["oracle", "preorder"])), 2);
}

#[test]
fn eval_prints_normal_forms() {
    for (file, name, value) in [
        ("add1.grip", "add1_unk_ten", "11"),
        ("casts.grip", "bool_to_nat", "err[Nat]"),
        ("omega.grip", "omega", "err[?[Type 0]]"),
        ("mult.grip", "mult_203", "0"),
    ] {
        let o = grip(&["eval", &corpus(file), name]);
        assert_eq!(code(&o), 0, "{name}");
        assert_eq!(stdout(&o).trim(), value, "{name}");
    }
}

#[test]
fn eval_traces_name_their_rules() {
    let o = grip(&["eval", &corpus("casts.grip"), "bool_to_nat", "--trace"]);
    assert_eq!(stdout(&o), "Head-Err | cast Bool Nat true | err[Nat]\nerr[Nat]\n");
    let o = grip(&["--format", "structured", "eval", &corpus("casts.grip"), "bool_to_nat", "--trace"]);
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(doc["value"], "err[Nat]");
    assert_eq!(doc["trace"]["entries"][0]["rule"], "HeadErr");
}

#[test]
fn eval_stops_when_fuel_runs_out() {
    let o = grip(&["--fuel", "3", "eval", &corpus("mult.grip"), "mult_23"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn prec_verdicts_and_exit_codes() {
    let o = grip(&["prec", "type", "Nat", "?[Type 0]", "--level", "0"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).starts_with("Holds"));
    let o = grip(&["prec", "type", "Nat -> Nat", "?[Type 0]", "--level", "0"]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).starts_with("Fails"));
    let o = grip(&["prec", "type", "iota (Nat -> Nat)", "?[Type 1]", "--level", "1"]);
    assert_eq!(code(&o), 0);
    let o = grip(&["prec", "term", "err[Nat]", "3", "Nat"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).starts_with("Holds"));
}

#[test]
fn structured_and_text_verdicts_agree() {
    for args in [["type", "Nat", "?[Type 0]"], ["type", "Nat -> Nat", "?[Type 0]"]] {
        let text = grip(&[&["prec"], &args[..]].concat());
        let json = grip(&[&["--format", "structured", "prec"], &args[..]].concat());
        assert_eq!(code(&text), code(&json));
        let doc: serde_json::Value = serde_json::from_slice(&json.stdout).unwrap();
        let verdict = doc["verdict"].as_str().unwrap();
        assert!(stdout(&text).to_lowercase().starts_with(verdict));
    }
}

#[test]
fn structured_output_is_deterministic() {
    let run = || grip(&["--format", "structured", "oracle", "agree", "--samples", "50", "--seed", "3"]).stdout;
    assert_eq!(run(), run());
}

#[test]
fn translation_rechecks_in_the_full_system() {
    let dir = std::env::temp_dir().join(format!("grip-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let src = dir.join("add1.grip");
    std::fs::write(
        &src,
        "def add : Nat -> Nat -> Nat :=\n  fun (n m : Nat) =>\n    \
         catch_nat (fun (_ : Nat) => Nat) m (fun (k : Nat) (r : Nat) => S r) err[Nat] ?[Nat] n.\n\
         def add1 : Nat -> Nat := fun (x : Nat) => add x 1.\n",
    )
    .unwrap();
    let out = dir.join("add1.out.grip");
    let o = grip(&["translate", src.to_str().unwrap(), "-o", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.contains("def add1_selfprec"));
    let o = grip(&["check", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(stdout(&o).contains("add1 : iota (Nat -> Nat)"));

    let empty = dir.join("empty.grip");
    std::fs::write(&empty, "").unwrap();
    let o = grip(&["translate", empty.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!(o.stdout.is_empty());
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn translation_rejects_terms_outside_the_fragment() {
    let o = grip(&["translate", &corpus("narrow.grip")]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("GripUpViolation"));
}

#[test]
fn oracle_commands() {
    let o = grip(&["oracle", "meets"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("direct cast: 5"));
    let o = grip(&["oracle", "preorder", "List Bool"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let o = grip(&["oracle", "eppair", "Nat", "?[Type 0]"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let o = grip(&["oracle", "agree", "--samples", "200"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(stdout(&o).contains("200 samples"));
}

#[test]
fn a_bad_prelude_override_is_a_usage_error() {
    let o = Command::new(env!("CARGO_BIN_EXE_grip"))
        .env("GRIP_PRELUDE", "/no/such/prelude.grip")
        .args(["prec", "type", "Nat", "Nat"])
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);
}
