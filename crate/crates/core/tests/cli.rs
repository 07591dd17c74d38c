use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn localflow(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_localflow"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// A 6-cycle and two demands: one unit across (routable), four units (not).
fn cycle(dir: &TempDir) -> (PathBuf, PathBuf, PathBuf) {
    let g = write(dir, "cycle.txt", "6 6\n0 1\n1 2\n2 3\n3 4\n4 5\n5 0\n");
    let ok = write(dir, "ok.txt", "1\n1 0 0.5\n1 3 -0.5\n");
    let bad = write(dir, "bad.txt", "1\n1 0 4\n1 3 -4\n");
    (g, ok, bad)
}

#[test]
fn solve_then_verify_a_flow() {
    let dir = TempDir::new().unwrap();
    let (g, ok, _) = cycle(&dir);
    let art = dir.path().join("flow.json");
    let out = localflow(&["solve", s(&g), s(&ok), "--eps", "0.2", "--out", s(&art)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let json: Value = serde_json::from_str(&fs::read_to_string(&art).unwrap()).unwrap();
    assert_eq!(json["kind"], "flow");
    assert_eq!(code(&localflow(&["verify", s(&g), s(&ok), s(&art)])), 0);
}

#[test]
fn solve_then_verify_a_certificate() {
    let dir = TempDir::new().unwrap();
    let (g, _, bad) = cycle(&dir);
    let art = dir.path().join("cert.json");
    let out = localflow(&["solve", s(&g), s(&bad), "--eps", "0.2", "--out", s(&art)]);
    assert_eq!(code(&out), 2, "{}", String::from_utf8_lossy(&out.stderr));
    let json: Value = serde_json::from_str(&fs::read_to_string(&art).unwrap()).unwrap();
    assert_eq!(json["kind"], "cut-certificate");
    assert_eq!(code(&localflow(&["verify", s(&g), s(&bad), s(&art)])), 0);

    let multi = dir.path().join("potential.json");
    let out = localflow(&[
        "solve",
        s(&g),
        s(&bad),
        "--eps",
        "0.2",
        "--multi",
        "--out",
        s(&multi),
    ]);
    assert_eq!(code(&out), 2);
    let json: Value = serde_json::from_str(&fs::read_to_string(&multi).unwrap()).unwrap();
    assert_eq!(json["kind"], "potential-certificate");
    assert_eq!(code(&localflow(&["verify", s(&g), s(&bad), s(&multi)])), 0);
}

#[test]
fn verify_rejects_a_corrupted_flow() {
    let dir = TempDir::new().unwrap();
    let (g, ok, _) = cycle(&dir);
    let art = dir.path().join("flow.json");
    assert_eq!(
        code(&localflow(&[
            "solve",
            s(&g),
            s(&ok),
            "--eps",
            "0.2",
            "--out",
            s(&art)
        ])),
        0
    );
    let mut json: Value = serde_json::from_str(&fs::read_to_string(&art).unwrap()).unwrap();
    let first = &mut json["flows"][0][0]["value"];
    *first = Value::from(first.as_f64().unwrap() + 3.0);
    fs::write(&art, json.to_string()).unwrap();
    assert_eq!(code(&localflow(&["verify", s(&g), s(&ok), s(&art)])), 3);
}

#[test]
fn verify_rejects_a_tight_cut() {
    // |b(S)| = 2 equals the boundary of {0}: not a certificate.
    let dir = TempDir::new().unwrap();
    let (g, _, _) = cycle(&dir);
    let b = write(&dir, "tight.txt", "1\n1 0 2\n1 3 -2\n");
    let art = write(
        &dir,
        "cut.json",
        r#"{"kind":"cut-certificate","set":[0],"b_of_s":2.0,"boundary":2,"volume":2}"#,
    );
    assert_eq!(code(&localflow(&["verify", s(&g), s(&b), s(&art)])), 3);
}

#[test]
fn bad_input_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    let (g, ok, _) = cycle(&dir);
    assert_eq!(
        code(&localflow(&["solve", s(&g), s(&ok), "--eps", "1.5"])),
        1
    );
    assert_eq!(code(&localflow(&["solve", s(&g), s(&ok)])), 1);
    assert_eq!(
        code(&localflow(&[
            "solve",
            s(&g),
            s(&ok),
            "--eps",
            "0.2",
            "--k",
            "2"
        ])),
        1
    );
    let broken = write(&dir, "broken.txt", "6 1\n0 9\n");
    let out = localflow(&["solve", s(&broken), s(&ok), "--eps", "0.2"]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("broken.txt:2"));
    assert_eq!(code(&localflow(&["frobnicate"])), 1);
}

#[test]
fn gen_is_deterministic_and_solvable() {
    let dir = TempDir::new().unwrap();
    let run = |tag: &str| {
        let g = dir.path().join(format!("g{tag}.txt"));
        let b = dir.path().join(format!("b{tag}.txt"));
        let out = localflow(&[
            "gen",
            "random-regular",
            "--n",
            "200",
            "--seed",
            "7",
            "--out",
            s(&g),
            "--demand",
            "random-balanced 6 2",
            "--commodities",
            "2",
            "--demand-out",
            s(&b),
        ]);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
        (g, b)
    };
    let (g1, b1) = run("1");
    let (g2, b2) = run("2");
    assert_eq!(fs::read(&g1).unwrap(), fs::read(&g2).unwrap());
    assert_eq!(fs::read(&b1).unwrap(), fs::read(&b2).unwrap());

    let art = dir.path().join("out.json");
    let stats = dir.path().join("stats.json");
    let out = localflow(&[
        "solve",
        s(&g1),
        s(&b1),
        "--eps",
        "0.3",
        "--audit",
        "--out",
        s(&art),
        "--stats",
        s(&stats),
    ]);
    let c = code(&out);
    assert!(c == 0 || c == 2, "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(code(&localflow(&["verify", s(&g1), s(&b1), s(&art)])), 0);
    let report: Value = serde_json::from_str(&fs::read_to_string(&stats).unwrap()).unwrap();
    assert!(report.is_object());
}
