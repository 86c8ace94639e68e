use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use dendrotest::formats::{parse_json, read_json, to_json};
use dendrotest::{emit_scatter, CardSortFile, ReportFile};
use dendrotest_core::permtest::PermutationTest;
use dendrotest_core::treespace::euclidean_norm_diff;
use dendrotest_core::TestConfig;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dendrotest")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn cluster_prints_the_tie_example() {
    let out = run(&["cluster", fixture("d1.json").to_str().unwrap(), "--method", "average", "--ties", "lex"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("cophenetic (condensed): 2 2.5 2.5"), "{}", stdout(&out));
}

#[test]
fn cluster_output_feeds_geodesic() {
    let dir = tempfile::tempdir().unwrap();
    let words = fixture("words.json");
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for (group, path) in [("students", &a), ("gardeners", &b)] {
        let out = run(&["cluster", words.to_str().unwrap(), "--group", group, "--out", path.to_str().unwrap()]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let same = run(&["geodesic", a.to_str().unwrap(), a.to_str().unwrap()]);
    assert!(stdout(&same).starts_with("distance 0\n"));
    let diff = run(&["geodesic", a.to_str().unwrap(), b.to_str().unwrap()]);
    let first = stdout(&diff).lines().next().unwrap().to_string();
    let d: f64 = first.strip_prefix("distance ").unwrap().parse().unwrap();
    assert!(d > 0.0);
}

#[test]
fn test_is_deterministic_and_verifiable() {
    let dir = tempfile::tempdir().unwrap();
    let words = fixture("words.json");
    let mut texts = Vec::new();
    for name in ["r1.json", "r2.json"] {
        let path = dir.path().join(name);
        let out = run(&[
            "test",
            words.to_str().unwrap(),
            "--metric",
            "both",
            "--permutations",
            "300",
            "--seed",
            "7",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert!(out.status.success());
        let mut value: serde_json::Value = read_json(&path).unwrap();
        value.as_object_mut().unwrap().remove("timing");
        texts.push(value.to_string());
    }
    assert_eq!(texts[0], texts[1]);

    let report_path = dir.path().join("r1.json");
    let report: ReportFile = read_json(&report_path).unwrap();
    assert_eq!(report.frobenius.as_ref().unwrap().replicates.len(), 300);
    let again: ReportFile = parse_json(&to_json(&report), "round trip").unwrap();
    assert_eq!(again, report);
    let verify = run(&["report", report_path.to_str().unwrap(), "--verify"]);
    assert!(verify.status.success());
    assert!(stdout(&verify).contains("verified"));
}

#[test]
fn usage_and_data_errors_have_distinct_codes() {
    let words = fixture("words.json");
    let w = words.to_str().unwrap();
    assert_eq!(run(&["test", w, "--permutations", "0"]).status.code(), Some(1));
    assert_eq!(run(&["test", w, "--alpha", "1.5"]).status.code(), Some(1));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(&["test", w, "--method", "median"]).status.code(), Some(1));
    assert_eq!(run(&["test", "/nonexistent/input.json"]).status.code(), Some(2));
    assert_eq!(run(&["test", w, "--group2", "nobody", "--permutations", "5"]).status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(
        &bad,
        r#"{"version": 1, "labels": ["a", "b", "c"],
            "participants": [{"id": "x7", "group": "g", "blocks": [["a", "b"]]}]}"#,
    )
    .unwrap();
    let out = run(&["test", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("\"x7\"") && err.contains("\"c\""), "{err}");
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn card_sort_files_round_trip() {
    let file: CardSortFile = read_json(&fixture("words.json")).unwrap();
    let sample = file.to_sample().unwrap();
    let back = CardSortFile::from_sample(&sample);
    assert_eq!(back.to_sample().unwrap(), sample);
    let reparsed: CardSortFile = parse_json(&to_json(&back), "round trip").unwrap();
    assert_eq!(reparsed, back);
}

#[test]
fn scatter_rows_respect_the_sandwich() {
    let sample = read_json::<CardSortFile>(&fixture("words.json")).unwrap().to_sample().unwrap();
    let config = TestConfig { permutations: 40, seed: 3, ..TestConfig::default() };
    let result = dendrotest::par_perm_test(&sample, "students", "gardeners", &config).unwrap();
    let mut buf = Vec::new();
    emit_scatter(&result, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[0], dendrotest::scatter::HEADER);
    assert_eq!(rows.len(), 1 + 40 + 1);
    assert!(rows[41].starts_with("observed\t-\t"));
    assert_eq!(rows[1..41].iter().filter(|r| r.starts_with("replicate\t")).count(), 40);

    let test = PermutationTest::new(&sample, "students", "gardeners", &config).unwrap();
    for (i, row) in rows[1..41].iter().enumerate() {
        let geodesic: f64 = row.split('\t').nth(3).unwrap().parse().unwrap();
        let (a, b) = test.fits(&test.plan(i).unwrap()).unwrap();
        let e = euclidean_norm_diff(a.tree.as_ref().unwrap(), b.tree.as_ref().unwrap()).unwrap();
        assert!(e <= geodesic + 1e-9 && geodesic <= std::f64::consts::SQRT_2 * e + 1e-9);
    }

    let single = TestConfig { metric: dendrotest_core::Metric::Frobenius, ..config };
    let r = dendrotest::par_perm_test(&sample, "students", "gardeners", &single).unwrap();
    assert!(emit_scatter(&r, Vec::new()).is_err());
}

#[test]
fn simulate_prints_one_row_per_size_and_metric() {
    let out = run(&["simulate", "--sizes", "4,6", "--runs", "2", "--permutations", "20", "--leaves", "5"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 1 + 4);
    assert!(text.lines().nth(1).unwrap().starts_with("4\tfrobenius\t"));
}

#[test]
fn thread_override_is_validated() {
    let out = Command::new(env!("CARGO_BIN_EXE_dendrotest"))
        .args(["test", fixture("words.json").to_str().unwrap(), "--permutations", "5"])
        .env("DENDROTEST_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let two = Command::new(env!("CARGO_BIN_EXE_dendrotest"))
        .args(["test", fixture("words.json").to_str().unwrap(), "--permutations", "5"])
        .env("DENDROTEST_THREADS", "2")
        .output()
        .unwrap();
    assert!(two.status.success());
}
