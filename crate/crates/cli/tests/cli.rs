use std::io::Write;
use std::process::{Command, Output};

use tempfile::NamedTempFile;

const EXAMPLE_ONE: &str = "\
agent 1 peak=0 endow=9
agent 2 peak=2 endow=1
agent 3 peak=3.5 endow=0
agent 4 peak=10 endow=2
";

fn realloc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_realloc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn file(text: &str) -> NamedTempFile {
    let mut f = NamedTempFile::new().unwrap();
    f.write_all(text.as_bytes()).unwrap();
    f
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn solve_prints_allocation_and_excess() {
    let f = file(EXAMPLE_ONE);
    let out = realloc(&["solve", "--rule", "uniform", f.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        stdout(&out),
        "alloc 1 0 net -9\nalloc 2 2 net 1\nalloc 3 7/2 net 7/2\nalloc 4 13/2 net 9/2\nz=7/2\nRESULT pass\n"
    );
}

#[test]
fn endowments_rule_echoes_holdings() {
    let f = file(EXAMPLE_ONE);
    let out = realloc(&["solve", "--rule", "endowments", f.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    for line in [
        "alloc 1 9 net 0",
        "alloc 2 1 net 0",
        "alloc 3 0 net 0",
        "alloc 4 2 net 0",
    ] {
        assert!(text.contains(line), "{text}");
    }
}

#[test]
fn built_in_examples_replay() {
    let out = realloc(&["replay", "--example", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("(0, 2, 7/2, 13/2)"), "{text}");
    assert!(text.contains("3, 4, 9/2"), "{text}");
    assert!(text.ends_with("RESULT pass\n"), "{text}");

    let out = realloc(&["replay", "--example", "B1"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    for v in ["(1, 4, 9)", "(1, 5, 8)", "11/2"] {
        assert!(text.contains(v), "{text}");
    }

    let out = realloc(&["replay", "--example", "all"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(!stdout(&out).contains(" FAIL"));
}

#[test]
fn lambda_trace_lists_every_step() {
    let f = file(EXAMPLE_ONE);
    let out = realloc(&["trace", "--lambda", f.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("step t=1 q=1:-9,2:3,3:3,4:3 frozen=1 lambda=3"), "{text}");
    assert!(
        text.contains("step t=3 q=1:-9,2:1,3:7/2,4:9/2 frozen=1,2,3 lambda=9/2"),
        "{text}"
    );
    assert!(text.contains("final-matches-rule=true"), "{text}");
}

#[test]
fn usage_and_input_errors_exit_two() {
    let f = file(EXAMPLE_ONE);
    let out = realloc(&["solve", "--rule", "bogus", f.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("unknown rule"));

    let bad = file("agent 1 peak=1 endow=1\nagent 2 peak=x endow=1\n");
    let out = realloc(&["solve", "--rule", "uniform", bad.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("line 2, column 14"), "{}", stderr(&out));
    assert!(stdout(&out).ends_with("RESULT error\n"));

    let empty = file("");
    let out = realloc(&["solve", "--rule", "uniform", empty.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("no agents"));

    let zero = file("agent 1 peak=2 endow=0\nagent 2 peak=0 endow=1\n");
    let out = realloc(&["solve", "--rule", "proportional", zero.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn audit_reports_a_violation_with_witness() {
    let out = realloc(&[
        "audit",
        "--rule",
        "max-satiating",
        "--axiom",
        "os-endow-mono",
        "--trials",
        "50",
        "--shrink",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let text = stdout(&out);
    assert!(text.contains("WITNESS kind=os-endow-mono rule=max-satiating"), "{text}");
    assert!(text.ends_with("RESULT violation\n"));

    let saved = file(&text);
    let out = realloc(&["replay", "--witness", saved.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
}

#[test]
fn clean_audit_passes() {
    let out = realloc(&["audit", "--rule", "uniform", "--axiom", "elb", "--trials", "50"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    assert!(stdout(&out).ends_with("RESULT pass\n"));
}

#[test]
fn constructed_witness_replays_and_stale_one_does_not() {
    let out = realloc(&["witness", "--property", "predelivery", "--rule", "uniform"]);
    assert_eq!(out.status.code(), Some(1));
    let text = stdout(&out);
    assert!(text.contains("WITNESS kind=predelivery rule=uniform"), "{text}");

    let saved = file(&text);
    let out = realloc(&["replay", "--witness", saved.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("replay=ok"));

    let stale = file(&text.replace("agent 1 peak=1 endow=3\n", "agent 1 peak=4 endow=3\n"));
    let out = realloc(&["replay", "--witness", stale.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1), "{}", stdout(&out));
}

#[test]
fn withdrawal_check_on_a_file() {
    let f = file("agent 1 peak=1 endow=3\nagent 2 peak=4 endow=1\nagent 3 peak=3 endow=1\nagent 4 peak=1 endow=3\n");
    let path = f.path().to_str().unwrap();
    let strict = realloc(&["manipulate", "--check", "withdrawal", "--rule", "uniform", path]);
    assert_eq!(strict.status.code(), Some(0), "{}", stdout(&strict));
    let weak = realloc(&[
        "manipulate",
        "--check",
        "withdrawal",
        "--mode",
        "weak",
        "--rule",
        "uniform",
        path,
    ]);
    assert_eq!(weak.status.code(), Some(1), "{}", stdout(&weak));
    assert!(stdout(&weak).contains("WITNESS kind=weak-withdrawal"));
}
