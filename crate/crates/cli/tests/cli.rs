use std::fs;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fivesquares")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn sieve_lists_primes() {
    let out = run(&["sieve", "--nmax", "30"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out), "p\n2\n3\n5\n7\n11\n13\n17\n19\n23\n29\n");
}

#[test]
fn count_spot_values() {
    let out = run(&["count", "--nmin", "19", "--nmax", "61"]);
    let text = stdout(&out);
    assert!(text.contains("\n19,0\n") && text.contains("\n20,1\n") && text.ends_with("\n61,5\n"));
}

#[test]
fn residue_filter_applies_to_counts() {
    // 77 = 25 + 25 + 9 + 9 + 9 in 5!/(2!·3!) orders
    let out = run(&["count", "--nmax", "100", "--mod", "5:24"]);
    assert_eq!(stdout(&out), "N,count\n5,0\n29,0\n53,0\n77,10\n");
}

#[test]
fn verify_reports_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let paths: Vec<_> = (0..2).map(|i| dir.path().join(format!("v{i}.csv"))).collect();
    for p in &paths {
        let out = run(&["verify", "--nmin", "10000", "--nmax", "20000", "--seed", "3", "--out", p.to_str().unwrap()]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        assert!(stdout(&out).contains("rmse_sigma"));
    }
    let a = fs::read(&paths[0]).unwrap();
    assert_eq!(a, fs::read(&paths[1]).unwrap());
    assert!(a.starts_with(b"N,I,J,sigma,naive,ratio,abs_err_sigma,abs_err_naive\n"));
}

#[test]
fn json_output_is_an_array() {
    let out = run(&["sigma", "--nmin", "1", "--nmax", "4", "--format", "json"]);
    let value: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(value.as_array().unwrap().len(), 4);
    assert!(value[0]["sigma"].is_number());
}

#[test]
fn sandwich_passes_and_reports_summary() {
    let out = run(&["sandwich", "--nmax", "3000", "--delta", "1/20", "--r", "5", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stderr).contains("\"violations\": 0"));
}

#[test]
fn infeasible_cup_is_a_runtime_error() {
    let out = run(&["sandwich", "--nmax", "1000", "--delta", "1/2"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("invalid cup geometry"));
}

#[test]
fn usage_errors_exit_with_one() {
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(&["verify", "--window", "3/5,1/10"]).status.code(), Some(1));
    assert_eq!(run(&["sigma", "--eta", "0,4,1"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn scan_is_seeded() {
    let a = run(&["expsum-scan", "--nmax", "100000", "--samples", "50", "--seed", "9"]);
    let b = run(&["expsum-scan", "--nmax", "100000", "--samples", "50", "--seed", "9"]);
    let text = stdout(&a);
    assert_eq!(text, stdout(&b));
    assert!(text.starts_with("t,d,q,kind,abs_S,normalized\n"));
    assert_eq!(text.lines().count(), 51);
}

#[test]
fn unwritable_output_names_the_path() {
    let out = run(&["sieve", "--nmax", "10", "--out", "/nonexistent-dir/p.csv"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/nonexistent-dir/p.csv"));
}
