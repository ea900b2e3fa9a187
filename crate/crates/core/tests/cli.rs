use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

fn qmfcut(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qmfcut"))
        .args(args)
        .env_remove("QMFCUT_CACHE_DIR")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn qmc_of_the_four_cycle() {
    let out = qmfcut(&["qmc", "--m", "4", "--N", "2", "--partition", "odd-even"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["qmc"], 4);
}

#[test]
fn theorem1_table_as_csv() {
    let out = qmfcut(&["theorem1", "--N", "2..8", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("m,N,n,partition,qmf_observed,bound,qmc,trials,seed,ring")
    );
    for line in lines {
        // the partition field is quoted because it contains commas
        let (head, rest) = line.split_once(",\"").unwrap();
        let (_, tail) = rest.split_once("\",").unwrap();
        let big_n: u64 = head.split(',').nth(1).unwrap().parse().unwrap();
        let observed: u64 = tail.split(',').next().unwrap().parse().unwrap();
        let expected = if matches!(big_n % 4, 2 | 3) { big_n * big_n - 1 } else { big_n * big_n };
        assert_eq!(observed, expected, "{line}");
    }
}

#[test]
fn theorem3_verifies_every_kernel_vector() {
    let out = qmfcut(&["theorem3", "--d", "2..6"]);
    assert_eq!(out.status.code(), Some(0));
    let rows = json(&out);
    let rows = rows.as_array().unwrap();
    assert_eq!(rows.len(), 5);
    for (k, row) in rows.iter().enumerate() {
        let d = k as u64 + 2;
        assert_eq!(row["all_KS_verified"], true);
        assert_eq!(row["bound"], 3 << (d - 2));
        assert_eq!(row["qmc"], 1 << d);
        assert_eq!(row["kernel_span"], 1 << (d - 2));
    }
}

#[test]
fn theorem2_reports_multiplicities() {
    let out = qmfcut(&["theorem2", "--d", "6", "--N", "2..3", "--trials", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let rows = json(&out);
    assert_eq!(rows[0]["sign_multiplicity_formula"], 10);
    assert_eq!(rows[1]["multiplicity_odd"], true);
    assert_eq!(rows[1]["parity_bound"], 728);
}

#[test]
fn usage_errors_exit_with_two() {
    for args in [
        &["qmc", "--N", "2"][..],
        &["qmc", "--m", "4", "--N", "2", "--partition", "sideways"],
        &["qmc", "--m", "4", "--N", "0"],
        &["theorem2", "--d", "4", "--N", "2"],
        &["invariant-span", "--m", "3", "--N", "2", "--format", "csv"],
        &["theorem3", "--d", "2", "--ring", "complex"],
        &["frobnicate"],
    ] {
        assert_eq!(qmfcut(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn runs_are_byte_identical() {
    let args = ["table", "--m", "4..5", "--N", "2", "--n", "2..3", "--trials", "4"];
    let a = qmfcut(&args);
    let b = qmfcut(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn cache_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cache.jsonl");
    let p = path.to_str().unwrap();
    let args = ["compare", "--m", "4", "--N", "3", "--trials", "4", "--cache", p];
    let first = qmfcut(&args);
    assert_eq!(first.status.code(), Some(0));
    assert_eq!(fs::read_to_string(&path).unwrap().lines().count(), 1);

    let second = qmfcut(&args);
    assert_eq!(first.stdout, second.stdout);
    assert_eq!(fs::read_to_string(&path).unwrap().lines().count(), 1);

    // a different seed is a different key
    let mut other = args.to_vec();
    other.extend(["--seed", "7"]);
    qmfcut(&other);
    assert_eq!(fs::read_to_string(&path).unwrap().lines().count(), 2);

    // --no-cache leaves the file alone
    let mut bypass = args.to_vec();
    bypass.extend(["--seed", "8", "--no-cache"]);
    qmfcut(&bypass);
    assert_eq!(fs::read_to_string(&path).unwrap().lines().count(), 2);
}

#[test]
fn corrupt_cache_lines_are_ignored() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("cache.jsonl"), "garbage\n{\"key\": 3}\n").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_qmfcut"))
        .args(["qmc", "--m", "6", "--N", "2"])
        .env("QMFCUT_CACHE_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["qmc"], 8);
    let text = fs::read_to_string(dir.path().join("cache.jsonl")).unwrap();
    assert_eq!(text.lines().count(), 3);
}
