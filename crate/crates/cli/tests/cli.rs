// SPDX-License-Identifier: Apache-2.0

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn corpus(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../core/corpus")
        .join(format!("{name}.scl"))
}

fn seedcov(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_seedcov"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn has_z3() -> bool {
    let ok = Command::new("z3").arg("-version").output().is_ok_and(|o| o.status.success());
    if !ok {
        eprintln!("z3 not found; skipping");
    }
    ok
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn parse_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.scl", "routine f(a: INTEGER)\ndo\n  a := \nend\n");
    let o = seedcov(&["gentests", &bad]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("bad.scl"));
    let o = seedcov(&["dump", "blocks", "/no/such/file.scl"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn dump_blocks_lists_leaf_rows() {
    let o = seedcov(&["dump", "blocks", corpus("nested").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let rows: Vec<String> = stdout(&o)
        .lines()
        .skip(2)
        .map(str::to_string)
        .collect();
    assert_eq!(rows.len(), 3, "{rows:?}");
}

#[test]
fn dump_smt_matches_golden() {
    let o = seedcov(&["dump", "smt", "--block", "1", corpus("simple").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let golden = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/golden/simple_block1.smt2");
    assert_eq!(stdout(&o), fs::read_to_string(golden).unwrap());
}

#[test]
fn dump_seeded_guards_each_block() {
    let o = seedcov(&["dump", "seeded", corpus("simple2").to_str().unwrap()]);
    let text = stdout(&o);
    for i in 1..=4 {
        assert!(text.contains(&format!("if __bn = {i} then check False end end")), "{text}");
    }
    assert!(text.contains("__bn <= 4"));
}

#[test]
fn gentests_writes_artifacts_with_manifest() {
    if !has_z3() {
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = seedcov(&["gentests", corpus("simple2").to_str().unwrap(), "--out", out]);
    assert_eq!(o.status.code(), Some(0));
    for ext in ["suite.json", "coverage.json", "report.txt"] {
        let text = fs::read_to_string(dir.path().join(format!("simple2.{ext}"))).unwrap();
        assert!(text.contains("sha256") || text.contains("corpus_sha256"), "{ext}");
        assert!(text.contains("Z3"), "{ext}");
        assert!(text.contains("unroll_max"), "{ext}");
    }
    let suite: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("simple2.suite.json")).unwrap()).unwrap();
    let pairs: Vec<(i64, i64)> = suite["tests"]
        .as_array()
        .unwrap()
        .iter()
        .map(|t| (t["target"].as_i64().unwrap(), t["inputs"]["a"].as_i64().unwrap()))
        .collect();
    assert_eq!(pairs, vec![(1, 1), (2, 0), (3, -1), (4, 0)]);

    let o = seedcov(&["coverage", corpus("simple2").to_str().unwrap(), "--out", out]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("4/4 (100.0%)"));
}

#[test]
fn lamp_like_reports_unreachable_block() {
    if !has_z3() {
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let o = seedcov(&["gentests", corpus("lamp_like").to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let cov: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("lamp_like.coverage.json")).unwrap()).unwrap();
    assert_eq!(cov["ratio"].as_f64(), Some(0.875));
    assert_eq!(cov["exhaustive"].as_bool(), Some(true));
    assert_eq!(cov["unreachable"], serde_json::json!([4]));
}

#[test]
fn tiny_timeout_leaves_block_undetermined() {
    if !has_z3() {
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let o = seedcov(&[
        "gentests",
        corpus("nonlinear_guard").to_str().unwrap(),
        "--timeout",
        "0.001",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    let suite: serde_json::Value = serde_json::from_str(
        &fs::read_to_string(dir.path().join("nonlinear_guard.suite.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(suite["undetermined"], serde_json::json!([1]));
    assert_eq!(suite["unreachable"], serde_json::json!([]));
}

#[test]
fn missing_solver_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let o = seedcov(&[
        "gentests",
        corpus("simple").to_str().unwrap(),
        "--solver",
        "/no/such/solver",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn verify_reports_proofs_and_counterexamples() {
    if !has_z3() {
        return;
    }
    let o = seedcov(&["verify", corpus("max").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("max: proved"));

    let dir = tempfile::tempdir().unwrap();
    let wrong = write(
        dir.path(),
        "wrong.scl",
        "routine wrong(a: INTEGER): INTEGER\ndo\n  Result := a + 1\nensure\n  Result > a + 1\nend\n",
    );
    let o = seedcov(&["verify", &wrong]);
    assert_eq!(o.status.code(), Some(4), "{}", stdout(&o));
}

#[test]
fn compare_straight_line() {
    if !has_z3() {
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = seedcov(&["compare", corpus("straight_line").to_str().unwrap(), "--out", out, "--tests", "50"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("compare.json")).unwrap()).unwrap();
    let text = v.to_string();
    assert!(text.contains("straight_line"), "{text}");
    let row = stdout(&o).lines().find(|l| l.starts_with("straight_line")).unwrap().to_string();
    assert_eq!(row.matches("100.0%").count(), 2, "{row}");
    assert!(dir.path().join("compare.txt").exists());
}

#[test]
fn config_file_is_applied_and_checked() {
    if !has_z3() {
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = write(
        dir.path(),
        "sc.conf",
        &format!("# run settings\nmode = msp\nminimize = false\nout = {}\n", out.display()),
    );
    let o = seedcov(&["gentests", corpus("simple").to_str().unwrap(), "--config", &cfg]);
    assert_eq!(o.status.code(), Some(0));
    let text = fs::read_to_string(out.join("simple.suite.json")).unwrap();
    assert!(text.contains("\"mode\": \"msp\""));
    assert!(text.contains("\"minimized\": false"));

    let bad = write(dir.path(), "bad.conf", "colour = blue\n");
    let o = seedcov(&["gentests", corpus("simple").to_str().unwrap(), "--config", &bad]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 1"));
}
