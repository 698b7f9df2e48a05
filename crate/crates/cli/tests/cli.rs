//! End-to-end tests of the binary: formats, exit codes, determinism.

use std::path::PathBuf;
use std::process::{Command, Output};
use std::sync::atomic::{AtomicU32, Ordering};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_permdiv"))
}

static COUNTER: AtomicU32 = AtomicU32::new(0);

fn temp_file(content: &str) -> PathBuf {
    let id = COUNTER.fetch_add(1, Ordering::SeqCst);
    let path = std::env::temp_dir().join(format!(
        "permdiv-test-{}-{id}.txt",
        std::process::id()
    ));
    std::fs::write(&path, content).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn gen_triangle_matches_expected_size() {
    let out = run(&["gen", "--triangle", "--n", "5"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.starts_with("n=5\n"));
    assert_eq!(text.lines().count(), 15); // header + 14 members
}

#[test]
fn gen_star_and_diversity_pipeline() {
    let out = run(&["gen", "--star", "2:3", "--n", "4"]);
    assert!(out.status.success());
    let file = temp_file(&stdout(&out));
    let report = run(&["diversity", "--input", file.to_str().unwrap(), "--format", "json"]);
    assert!(report.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&report)).unwrap();
    assert_eq!(v["result"]["gamma"], 0);
    assert_eq!(v["result"]["size"], 6);
    assert_eq!(v["result"]["argmin_cell"], "2:3");
}

#[test]
fn malformed_input_exits_2() {
    let file = temp_file("n=3\n1 1 2\n");
    let out = run(&["diversity", "--input", file.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_bounds_hypothesis_exits_3() {
    let out = run(&["verify-bounds", "--n", "499"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stdout(&out).contains("hypothesis"));
}

#[test]
fn verify_bounds_proved_exit_0() {
    let out = run(&["verify-bounds", "--n", "500", "--derangements", "8", "--format", "json"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["result"]["all_proved"], true);
    let derangements = v["result"]["derangement_identity"].as_array().unwrap();
    assert_eq!(derangements.len(), 8);
    assert!(derangements.iter().all(|d| d["identity_holds"] == true));
}

#[test]
fn budget_exceeded_exits_4() {
    let gen = run(&["gen", "--symmetric", "--n", "6"]);
    let file = temp_file(&stdout(&gen));
    let out = run(&[
        "decompose",
        "--input",
        file.to_str().unwrap(),
        "--r",
        "2",
        "--budget",
        "5",
    ]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn decompose_star_report() {
    let gen = run(&["gen", "--star", "1:1", "--n", "4"]);
    let file = temp_file(&stdout(&gen));
    let out = run(&[
        "decompose",
        "--input",
        file.to_str().unwrap(),
        "--r",
        "2",
        "--q-cap",
        "4",
        "--format",
        "json",
    ]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["result"]["remainder_size"], 0);
    assert_eq!(v["result"]["stop_reason"]["kind"], "exhausted");
    assert_eq!(v["result"]["input_intersecting"], true);
}

#[test]
fn compress_star_of_pairs() {
    let file = temp_file("n=4\n1:1 2:2\n1:1 2:3\n1:1 2:4\n");
    let out = run(&["compress", "--input", file.to_str().unwrap(), "--s", "2"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("output_size=1"), "{text}");
    assert!(text.contains("\n1:1\n"), "{text}");
}

#[test]
fn cascade_triangle_classification() {
    let file = temp_file("n=5\n1:1 2:2\n1:1 3:3\n2:2 3:3\n");
    let out = run(&[
        "cascade",
        "--input",
        file.to_str().unwrap(),
        "--q-int",
        "4",
        "--format",
        "json",
    ]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["result"]["classification"]["kind"], "triangle");
    assert_eq!(v["result"]["residue_size"], 3);
}

#[test]
fn montecarlo_deterministic_across_workers() {
    let gen = run(&["gen", "--symmetric", "--n", "2"]);
    let file = temp_file(&stdout(&gen));
    let common = [
        "montecarlo",
        "--input",
        file.to_str().unwrap(),
        "--experiment",
        "cover",
        "--p",
        "1/2",
        "--trials",
        "20000",
        "--seed",
        "7",
        "--format",
        "json",
    ];
    let a = run(&[&common[..], &["--workers", "1"]].concat());
    let b = run(&[&common[..], &["--workers", "8"]].concat());
    let c = run(&[&common[..], &["--workers", "8"]].concat());
    assert!(a.status.success());
    assert_eq!(stdout(&a), stdout(&b));
    assert_eq!(stdout(&b), stdout(&c));
}

#[test]
fn montecarlo_lemma_hypothesis_refused() {
    // a singleton family is never 2-spread
    let file = temp_file("n=3\n1 2 3\n");
    let out = run(&[
        "montecarlo",
        "--input",
        file.to_str().unwrap(),
        "--experiment",
        "lemma",
        "--r",
        "2",
        "--delta",
        "1/4",
        "--m",
        "2",
        "--trials",
        "100",
        "--seed",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn montecarlo_split_intersecting_zero() {
    let gen = run(&["gen", "--triangle", "--n", "5"]);
    let file = temp_file(&stdout(&gen));
    let out = run(&[
        "montecarlo",
        "--input",
        file.to_str().unwrap(),
        "--experiment",
        "split",
        "--trials",
        "5000",
        "--seed",
        "3",
        "--format",
        "json",
    ]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["result"]["successes"], 0);
}

#[test]
fn search_exact_summary() {
    let out = run(&["search", "--n", "3", "--mode", "exact"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.starts_with("# search: mode=exact n=3 best_gamma="), "{text}");
    // the emitted family parses in the family format
    let family: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert!(family[0].starts_with("n=3"));
}

#[test]
fn search_heuristic_respects_triangle_witness() {
    let out = run(&[
        "search", "--n", "5", "--mode", "heuristic", "--iterations", "4", "--seed", "11",
        "--format", "json",
    ]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(v["result"]["best_gamma"].as_u64().unwrap() >= 4);
}

#[test]
fn csv_format_renders() {
    let out = run(&["verify-bounds", "--n", "500", "--format", "csv"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.starts_with("field,value\n"));
    assert!(text.contains("result.all_proved,true"));
}

#[test]
fn unknown_flag_rejected() {
    let out = run(&["diversity", "--nonsense", "x"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn env_budget_override() {
    let gen = run(&["gen", "--symmetric", "--n", "6"]);
    let file = temp_file(&stdout(&gen));
    let out = bin()
        .args(["decompose", "--input", file.to_str().unwrap(), "--r", "2"])
        .env("PERMDIV_BUDGET", "5")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(4));
}
