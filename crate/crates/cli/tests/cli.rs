//! End-to-end tests of the `quflow` binary: JSON/CSV contracts, exit codes,
//! piping `zoo` output back into `analyze`/`triple`, and byte-level
//! reproducibility under a fixed seed.

use std::io::Write;
use std::process::{Command, Output, Stdio};

fn quflow(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_quflow"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn quflow_with_stdin(args: &[&str], input: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_quflow"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("binary spawns");
    child
        .stdin
        .take()
        .expect("stdin handle")
        .write_all(input.as_bytes())
        .expect("stdin write");
    child.wait_with_output().expect("binary runs")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn formulas_blocks_single_three_block() {
    let out = quflow(&["formulas", "blocks", "--blocks", "3"]);
    assert!(out.status.success());
    let v = stdout_json(&out);
    assert_eq!(v["R"], "13");
    assert_eq!(v["kind"], "blocks");
}

#[test]
fn formulas_rejects_unsorted_blocks() {
    let out = quflow(&["formulas", "blocks", "--blocks", "3,2"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn zoo_sl2_pipes_into_analyze() {
    let alg = quflow(&["zoo", "--family", "sl", "--d", "2"]);
    assert!(alg.status.success());
    let text = String::from_utf8(alg.stdout).expect("utf8");
    let out = quflow_with_stdin(&["analyze"], &text);
    assert!(out.status.success());
    let v = stdout_json(&out);
    assert_eq!(v["R"], "3");
    assert_eq!(v["quasi_unipotent"], true);
    assert_eq!(v["structure"]["depths"], serde_json::json!([2]));
}

#[test]
fn zoo_sl2_pipes_into_triple() {
    let alg = quflow(&["zoo", "--family", "sl", "--d", "2"]);
    let text = String::from_utf8(alg.stdout).expect("utf8");
    let out = quflow_with_stdin(&["triple"], &text);
    assert!(out.status.success());
    let v = stdout_json(&out);
    assert_eq!(v["R"], "3");
    assert_eq!(v["spectrum"]["d_n"]["2"], 1);
}

#[test]
fn analyze_rejects_semisimple_matrix_with_exit_2() {
    let m = r#"{"rows":2,"cols":2,"entries":[["1","0"],["0","-1"]]}"#;
    let out = quflow_with_stdin(&["analyze"], m);
    assert_eq!(out.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).expect("stderr is JSON");
    assert!(err["offending_eigenvalue"].is_array());
}

#[test]
fn simulate_bowen_is_byte_identical_for_fixed_seed() {
    let args = [
        "simulate",
        "bowen",
        "--depths",
        "1",
        "--samples",
        "2000",
        "--tcount",
        "3",
        "--tmin",
        "5",
        "--seed",
        "7",
    ];
    let a = quflow(&args);
    let b = quflow(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let last = String::from_utf8(a.stdout).expect("utf8");
    let fit_line = last.lines().last().expect("fit line");
    let fit: serde_json::Value = serde_json::from_str(fit_line).expect("fit is JSON");
    let slope = fit["exponent"].as_f64().expect("exponent");
    assert!((slope + 1.0).abs() < 0.3, "slope {slope} far from -1");
}

#[test]
fn simulate_assert_slope_failure_exits_3() {
    let out = quflow(&[
        "simulate",
        "bowen",
        "--depths",
        "0",
        "--samples",
        "2000",
        "--tcount",
        "3",
        "--tmin",
        "5",
        "--seed",
        "7",
        "--assert-slope=-5",
        "--slope-tol",
        "0.1",
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn torus_q_one_is_a_usage_error() {
    let out = quflow(&[
        "torus",
        "--q",
        "1",
        "--samples",
        "300",
        "--grid",
        "10,20,40,80",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn unknown_flag_exits_1() {
    let out = quflow(&["--no-such-flag"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn torus_small_run_emits_csv_then_fit_json() {
    let out = quflow(&[
        "torus",
        "--d",
        "1",
        "--q",
        "4",
        "--samples",
        "300",
        "--grid",
        "10,20,40,80",
        "--seed",
        "9",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).expect("utf8");
    let mut lines = text.lines();
    assert_eq!(
        lines.next().expect("header"),
        "n,s_greedy,s_separated,s_volume,log10_n,log10_s_volume"
    );
    let fit_line = text.lines().last().expect("fit line");
    let fit: serde_json::Value = serde_json::from_str(fit_line).expect("fit is JSON");
    assert!(fit["exponent"].is_number());
    assert_eq!(fit["points"].as_array().expect("points").len(), 4);
}

#[test]
fn omitted_seed_is_drawn_and_printed() {
    let out = quflow(&["simulate", "brudnyi", "--trials", "50"]);
    assert!(out.status.success());
    let err = String::from_utf8(out.stderr).expect("utf8");
    assert!(err.contains("seed:"), "stderr was {err:?}");
}

#[test]
fn sequence_csv_reports_expected_decay() {
    let out = quflow(&[
        "simulate",
        "sequence",
        "--depths",
        "1",
        "--samples",
        "2000",
        "--nmax",
        "5",
        "--lambda",
        "2.718281828459045",
        "--seed",
        "11",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).expect("utf8");
    assert!(text.starts_with("n,volume,ln_volume,accepted,samples"));
    let fit: serde_json::Value =
        serde_json::from_str(text.lines().last().expect("fit line")).expect("fit JSON");
    let slope = fit["exponent"].as_f64().expect("exponent");
    assert!((slope + 1.0).abs() < 0.3, "slope {slope} far from -1");
}
