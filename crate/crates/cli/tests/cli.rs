//! End-to-end checks of the `llnlab` binary: exit codes, output shapes, and
//! reproducibility across worker counts.

use std::path::PathBuf;
use std::process::{Command, Output};

fn llnlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_llnlab")).args(args).output().expect("binary runs")
}

fn write_space(dir: &std::path::Path, name: &str, json: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, json).unwrap();
    path
}

fn fair_space(dir: &std::path::Path) -> PathBuf {
    write_space(dir, "fair.json", r#"{"symbols":["0","1"],"probs":["1/2","1/2"]}"#)
}

#[test]
fn entropy_of_the_uniform_space_is_exactly_one() {
    let dir = tempfile::tempdir().unwrap();
    let space = fair_space(dir.path());
    let out = llnlab(&["entropy", "--space", space.to_str().unwrap()]);
    assert!(out.status.success());
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "1");
}

#[test]
fn measure_and_bounds_examples() {
    let dir = tempfile::tempdir().unwrap();
    let space = fair_space(dir.path());
    let out = llnlab(&["measure", "--space", space.to_str().unwrap(), "--word", "0101"]);
    assert!(out.status.success());
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "1/16");

    let out = llnlab(&[
        "bounds",
        "--hoeffding",
        "--a",
        "0",
        "--b",
        "1",
        "--eps",
        "0.1",
        "--n",
        "100",
    ]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let value = v["value"].as_f64().unwrap();
    assert!((value - 0.270_670_566_473_225_4).abs() < 1e-6);
}

#[test]
fn speedlimit_mc_reproduces_the_binomial_value() {
    let dir = tempfile::tempdir().unwrap();
    let space = fair_space(dir.path());
    let out = llnlab(&[
        "speedlimit",
        "mc",
        "--space",
        space.to_str().unwrap(),
        "--symbol",
        "1",
        "--n1",
        "1",
        "--n",
        "2",
        "--trials",
        "100000",
        "--seed",
        "7",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    let mut lines = text.lines();
    let header = lines.next().unwrap();
    assert!(header.starts_with("symbol,n1,n,length,seed,trials,passes,rate"));
    let row = lines.next().unwrap();
    let rate: f64 = row.split(',').nth(7).unwrap().parse().unwrap();
    assert!((rate - 0.978_729).abs() < 0.004, "rate {rate} near 64142/65536");
}

#[test]
fn gen_scan_roundtrip_and_worker_independence() {
    let dir = tempfile::tempdir().unwrap();
    let space = fair_space(dir.path());
    let seq = dir.path().join("seq.txt");
    let out = llnlab(&[
        "gen",
        "--space",
        space.to_str().unwrap(),
        "--length",
        "5000",
        "--seed",
        "3",
        "--to",
        seq.to_str().unwrap(),
    ]);
    assert!(out.status.success());

    let scan = |workers: &str| {
        let out = llnlab(&[
            "--workers",
            workers,
            "lln-scan",
            "--prefix",
            seq.to_str().unwrap(),
            "--space",
            space.to_str().unwrap(),
            "--eps",
            "1",
            "--nmax",
            "6",
        ]);
        assert!(out.status.success());
        out.stdout
    };
    assert_eq!(scan("1"), scan("4"), "scan output independent of worker count");

    let mc = |workers: &str| {
        let out = llnlab(&[
            "--workers",
            workers,
            "dichotomy",
            "--space",
            space.to_str().unwrap(),
            "--symbol",
            "1",
            "--t",
            "2,3",
            "--trials",
            "64",
            "--length",
            "2000",
            "--seed",
            "11",
        ]);
        assert!(out.status.success());
        out.stdout
    };
    assert_eq!(mc("1"), mc("4"), "dichotomy output independent of worker count");
}

#[test]
fn io_validates_and_converts() {
    let dir = tempfile::tempdir().unwrap();
    let space = fair_space(dir.path());
    let seq = dir.path().join("seq.txt");
    std::fs::write(&seq, "0\n1\n1\n0\n").unwrap();
    let bin = dir.path().join("seq.bin");
    let out = llnlab(&[
        "io",
        "--space",
        space.to_str().unwrap(),
        "--in",
        seq.to_str().unwrap(),
        "--to",
        bin.to_str().unwrap(),
        "--byte-out",
    ]);
    assert!(out.status.success());
    assert_eq!(std::fs::read(&bin).unwrap(), vec![0u8, 1, 1, 0]);

    // bad token -> domain error, exit code 1
    std::fs::write(&seq, "0\nx\n").unwrap();
    let out = llnlab(&[
        "io",
        "--space",
        space.to_str().unwrap(),
        "--in",
        seq.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
}

#[test]
fn usage_errors_exit_with_two() {
    let out = llnlab(&["no-such-subcommand"]);
    assert_eq!(out.status.code(), Some(2));
    let out = llnlab(&["bounds"]);
    assert_eq!(out.status.code(), Some(1), "missing rule is a domain error");
}

#[test]
fn slln_commands_run_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let rv = write_space(
        dir.path(),
        "rv.json",
        r#"{"support":["0","1/2","1"],"probs":["1/4","1/2","1/4"],"envelope":["0","1"]}"#,
    );
    let out = llnlab(&["slln", "cert", "--rv", rv.to_str().unwrap(), "--eps", "1", "--delta", "1/8"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["value"].as_f64().unwrap() < 0.125);

    let out = llnlab(&[
        "slln",
        "checkpoint",
        "--rv",
        rv.to_str().unwrap(),
        "--n1",
        "1",
        "--n",
        "2",
        "--trials",
        "2000",
        "--seed",
        "5",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.lines().next().unwrap().contains("dp_value"));
}
