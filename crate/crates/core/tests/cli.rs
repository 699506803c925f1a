//! Command-line error handling and report files.

use std::path::Path;
use std::process::{Command, Output};

fn mvd(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mvd"))
        .args(args)
        .current_dir(dir)
        .output()
        .unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn setup() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("square.csv"), "id,x,y\n0,0,0\n1,1,0\n2,1,1\n3,0,1\n").unwrap();
    let out = mvd(dir.path(), &["build", "--input", "square.csv", "--output", "s.json"]);
    assert!(out.status.success(), "{}", stderr(&out));
    dir
}

#[test]
fn bad_inputs_exit_nonzero_and_name_the_input() {
    let dir = setup();
    let d = dir.path();
    std::fs::write(d.join("dup.csv"), "x,y\n0,0\n1,1\n0,0\n").unwrap();
    let out = mvd(d, &["build", "--input", "dup.csv", "--output", "x.json"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("dup.csv:4:"), "{}", stderr(&out));
    assert!(!d.join("x.json").exists());

    std::fs::write(d.join("nan.csv"), "x,y\n0,0\n1,NaN\n").unwrap();
    let out = mvd(d, &["build", "--input", "nan.csv", "--output", "x.json"]);
    assert!(stderr(&out).contains("nan.csv:3:"), "{}", stderr(&out));

    let out = mvd(d, &["build", "--input", "missing.csv", "--output", "x.json"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("missing.csv"), "{}", stderr(&out));

    let out = mvd(d, &["query", "--input", "s.json", "--point", "0.1;0.2"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("0.1;0.2"), "{}", stderr(&out));

    std::fs::write(d.join("broken.json"), "{\"format\":\"mvd-snapshot\"").unwrap();
    let out = mvd(d, &["query", "--input", "broken.json", "--point", "0,0"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("broken.json"), "{}", stderr(&out));
}

#[test]
fn failed_updates_leave_the_snapshot_untouched() {
    let dir = setup();
    let d = dir.path();
    let before = std::fs::read(d.join("s.json")).unwrap();

    std::fs::write(d.join("del.txt"), "1\n42\n").unwrap();
    let out = mvd(d, &["update", "--input", "s.json", "--delete", "del.txt"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(
        stderr(&out).contains("del.txt") && stderr(&out).contains("42"),
        "{}",
        stderr(&out)
    );

    std::fs::write(d.join("reuse.csv"), "id,x,y\n2,5,5\n").unwrap();
    let out = mvd(d, &["update", "--input", "s.json", "--insert", "reuse.csv"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("reuse.csv:2:"), "{}", stderr(&out));

    std::fs::write(d.join("dup.csv"), "x,y\n1,1\n").unwrap();
    let out = mvd(d, &["update", "--input", "s.json", "--insert", "dup.csv"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("dup.csv:2:"), "{}", stderr(&out));

    assert_eq!(std::fs::read(d.join("s.json")).unwrap(), before);
}

#[test]
fn empty_update_only_advances_the_revision() {
    let dir = setup();
    let d = dir.path();
    std::fs::write(d.join("none.txt"), "# nothing\n").unwrap();
    std::fs::write(d.join("none.csv"), "").unwrap();
    let before = std::fs::read_to_string(d.join("s.json")).unwrap();
    let out = mvd(
        d,
        &[
            "update", "--input", "s.json", "--delete", "none.txt", "--insert", "none.csv",
        ],
    );
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(
        String::from_utf8_lossy(&out.stdout),
        "revision=1 deleted=0 inserted=0 n=4 layer_sizes=4\n"
    );
    let after = std::fs::read_to_string(d.join("s.json")).unwrap();
    assert_eq!(after, before.replace("\"revision\":0", "\"revision\":1"));
}

#[test]
fn usage_errors_exit_with_status_two() {
    let dir = setup();
    let d = dir.path();
    for args in [
        &["bench", "--dist", "uniform", "--input", "square.csv"][..],
        &["bench", "--dist", "file"],
        &["bench", "--dist", "normal"],
        &["query", "--input", "s.json"],
        &["frobnicate"],
    ] {
        let out = mvd(d, args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", stderr(&out));
    }
    let out = mvd(d, &["bench", "--sizes", "0", "--trials", "1", "--queries", "5"]);
    assert_eq!(out.status.code(), Some(1), "{}", stderr(&out));
}

#[test]
fn bench_writes_csv_markdown_and_json() {
    let dir = setup();
    let d = dir.path();
    let out = mvd(
        d,
        &[
            "bench",
            "--dist",
            "exp",
            "--sizes",
            "10,200",
            "--k-list",
            "1,4",
            "--trials",
            "2",
            "--queries",
            "20",
            "--indices",
            "mvd,kdtree,linear",
            "--output",
            "r.csv",
        ],
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let csv = std::fs::read_to_string(d.join("r.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some(mvd::bench::CSV_HEADER));
    assert_eq!(lines.count(), 3 * 2 * 2);
    assert!(std::fs::read_to_string(d.join("r.md")).unwrap().contains("| k |"));
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(d.join("r.json")).unwrap()).unwrap();
    assert_eq!(json["metadata"]["dataset"], "exp");

    let out = mvd(
        d,
        &[
            "bench",
            "--dist",
            "file",
            "--input",
            "square.csv",
            "--trials",
            "1",
            "--queries",
            "10",
        ],
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.lines().any(|l| l.starts_with("mvd,4,1,1,")), "{text}");
}
