use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn corpus(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(rel)
}

fn run(args: &[&str]) -> (i32, String, String) {
    let Output { status, stdout, stderr } =
        Command::new(env!("CARGO_BIN_EXE_sentinel-verify")).args(args).output().expect("binary runs");
    (status.code().unwrap(), String::from_utf8(stdout).unwrap(), String::from_utf8(stderr).unwrap())
}

fn path(rel: &str) -> String {
    corpus(rel).display().to_string()
}

#[test]
fn ex2_verifies() {
    let (code, out, _) = run(&[&path("motivating/ex2.sv")]);
    assert_eq!(code, 0);
    assert!(out.contains("Verified: ex2"), "{out}");
}

#[test]
fn ex1_reports_one_may_overflow() {
    let (code, out, _) = run(&[&path("motivating/ex1.sv")]);
    assert_eq!(code, 1);
    let lines: Vec<&str> = out.lines().filter(|l| l.contains("may-overflow")).collect();
    assert_eq!(lines.len(), 1, "{out}");
    assert!(lines[0].contains("ex1.sv:5:12: may-overflow: `n + 1`"), "{out}");
    assert!(!out.contains("must-overflow"));
}

#[test]
fn ex3_covers_its_error_branch() {
    let (code, out, _) = run(&[&path("motivating/ex3.sv")]);
    assert_eq!(code, 0);
    assert!(out.contains("Verified: ex3") && out.contains("declared overflow"), "{out}");
}

#[test]
fn ex4_and_sortedll_verify() {
    let (code, out, _) = run(&["--fuel", "3", &path("motivating/ex4.sv"), &path("motivating/sortedll.sv")]);
    assert_eq!(code, 0, "{out}");
    for m in ["ex4", "empty_min", "first", "make_empty"] {
        assert!(out.contains(&format!("Verified: {m}")), "{out}");
    }
}

#[test]
fn malformed_input_exits_with_position() {
    let dir = std::env::temp_dir().join(format!("sv-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.sv");
    std::fs::write(&bad, "int f(int n)\n  requires n>=0\n  ensures res=;\n{ return n; }\n").unwrap();
    let (code, out, err) = run(&[bad.to_str().unwrap()]);
    assert_eq!(code, 3);
    assert!(out.is_empty());
    assert!(err.contains("bad.sv:3:"), "{err}");
}

#[test]
fn missing_file_is_an_input_error() {
    let (code, _, err) = run(&["/nonexistent/x.sv"]);
    assert_eq!(code, 3);
    assert!(err.contains("x.sv"));
}

#[test]
fn jsonl_records_have_fixed_fields() {
    let (code, out, _) = run(&["--format", "jsonl-like", &path("motivating/ex1.sv")]);
    assert_eq!(code, 1);
    let line = out.lines().next().unwrap();
    let v: serde_json::Value = serde_json::from_str(line).unwrap();
    let keys: Vec<&str> = v.as_object().unwrap().keys().map(|k| k.as_str()).collect();
    assert_eq!(keys.len(), 5);
    assert!(line.find("\"path\"") < line.find("\"line\"") && line.find("\"col\"") < line.find("\"severity\""));
    assert_eq!(v["line"], 5);
    assert_eq!(v["col"], 12);
    assert_eq!(v["severity"], "may-overflow");
}

#[test]
fn output_is_deterministic() {
    let args = [path("seeded/s02_sum_two.sv"), path("clean/c08_calls.sv")];
    let a = run(&[&args[0], &args[1]]);
    let b = run(&[&args[0], &args[1]]);
    assert_eq!(a, b);
}

#[test]
fn oracle_mode_reports_true_positive() {
    let (code, out, _) = run(&["--mode", "oracle", "--oracle-width", "4", &path("motivating/ex1.sv")]);
    assert_eq!(code, 0);
    assert!(out.contains("true positives:  5:12"), "{out}");
}

#[test]
fn oracle_width_is_range_checked() {
    let (code, _, _) = run(&["--mode", "oracle", "--oracle-width", "40", &path("motivating/ex1.sv")]);
    assert_eq!(code, 3);
}

#[test]
fn dump_constraints_prints_queries() {
    let (code, out, _) = run(&["--dump-constraints", &path("motivating/ex2.sv")]);
    assert_eq!(code, 0);
    assert!(out.lines().count() > 1, "{out}");
}

#[test]
fn trace_entail_prints_search() {
    let (_, out, _) = run(&["--trace-entail", &path("motivating/ex2.sv")]);
    assert!(out.contains("  | "), "{out}");
}
