//! End-to-end tests driving the `cpmm` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

const STATE_EX1: &str = r#"{
  "pools":[{"token0":"T0","token1":"T1","r0":40.0,"r1":60.0,"fee":0.997,"minted_supply":100.0}],
  "wallets":[{"owner":"A","balances":{"T0":30.0,"T1":20.0},"minted_balances":{}}]
}"#;

const STATE_EX5: &str = r#"{
  "pools":[{"token0":"T0","token1":"T1","r0":10.0,"r1":30.0,"fee":0.9,"minted_supply":100.0}],
  "wallets":[{"owner":"A","balances":{"T0":30.0,"T1":20.0},"minted_balances":{}}]
}"#;

const ORACLE_45: &str = r#"{"prices":{"T0":4.0,"T1":5.0}}"#;

fn write(dir: &TempDir, name: &str, contents: &str) -> String {
    let path = dir.path().join(name);
    fs::write(&path, contents).unwrap();
    path.to_str().unwrap().to_string()
}

fn cpmm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cpmm"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_of(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).unwrap()
}

fn stderr_of(output: &Output) -> String {
    String::from_utf8(output.stderr.clone()).unwrap()
}

#[test]
fn simulate_replays_a_trace() {
    let dir = TempDir::new().unwrap();
    let state = write(&dir, "state.json", STATE_EX1);
    let oracle = write(&dir, "oracle.json", ORACLE_45);
    let trace = write(
        &dir,
        "trace.json",
        r#"[{"sender":"A","amount_in":10.0,"token_in":"T0","token_out":"T1"}]"#,
    );
    let out = cpmm(&["simulate", "--state", &state, "--oracle", &oracle, "--trace", &trace]);
    assert!(out.status.success(), "stderr: {}", stderr_of(&out));
    let text = stdout_of(&out);
    assert!(text.contains("step 0: A swaps 10 T0 -> T1"), "{text}");
    assert!(text.contains("gain 19.8559135481"), "{text}");
    assert!(text.contains("\"T1\":31.9711827096"), "{text}");
    assert!(text.contains("\"r0\":50.0"), "{text}");
}

#[test]
fn simulate_split_trace_matches_worked_balances() {
    let dir = TempDir::new().unwrap();
    let state = write(
        &dir,
        "state.json",
        r#"{
          "pools":[{"token0":"T0","token1":"T1","r0":400.0,"r1":600.0,"fee":0.997,"minted_supply":100.0}],
          "wallets":[{"owner":"A","balances":{"T0":300.0,"T1":200.0},"minted_balances":{}}]
        }"#,
    );
    let oracle = write(&dir, "oracle.json", ORACLE_45);
    let trace = write(
        &dir,
        "trace.json",
        r#"[{"sender":"A","amount_in":40.0,"token_in":"T0","token_out":"T1"},
            {"sender":"A","amount_in":60.0,"token_in":"T0","token_out":"T1"}]"#,
    );
    let out = cpmm(&["simulate", "--state", &state, "--oracle", &oracle, "--trace", &trace]);
    assert!(out.status.success());
    let text = stdout_of(&out);
    // Final T1 balance 319.696 +- 0.001.
    let final_line = text.lines().find(|l| l.starts_with("final")).unwrap();
    let balance: f64 = final_line
        .split("\"T1\":")
        .nth(1)
        .unwrap()
        .split(['}', ','])
        .next()
        .unwrap()
        .parse()
        .unwrap();
    assert!((balance - 319.696).abs() <= 0.001, "balance = {balance}");
}

#[test]
fn simulate_exits_2_on_disabled_transaction() {
    let dir = TempDir::new().unwrap();
    let state = write(&dir, "state.json", STATE_EX1);
    let oracle = write(&dir, "oracle.json", ORACLE_45);
    let trace = write(
        &dir,
        "trace.json",
        r#"[{"sender":"A","amount_in":1000.0,"token_in":"T0","token_out":"T1"}]"#,
    );
    let out = cpmm(&["simulate", "--state", &state, "--oracle", &oracle, "--trace", &trace]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr_of(&out);
    assert!(err.contains("step 0"), "{err}");
    assert!(err.contains("insufficient balance"), "{err}");
}

#[test]
fn simulate_exits_2_on_missing_pool() {
    let dir = TempDir::new().unwrap();
    let state = write(&dir, "state.json", STATE_EX1);
    let oracle = write(&dir, "oracle.json", ORACLE_45);
    let trace = write(
        &dir,
        "trace.json",
        r#"[{"sender":"A","amount_in":1.0,"token_in":"T0","token_out":"T9"}]"#,
    );
    let out = cpmm(&["simulate", "--state", &state, "--oracle", &oracle, "--trace", &trace]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_of(&out).contains("no pool"));
}

#[test]
fn malformed_state_exits_1_with_field_path() {
    let dir = TempDir::new().unwrap();
    let state = write(&dir, "state.json", &STATE_EX1.replace("0.997", "2.0"));
    let oracle = write(&dir, "oracle.json", ORACLE_45);
    let out = cpmm(&["rate", "--state", &state, "--oracle", &oracle, "--pair", "T0,T1"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr_of(&out).contains("pools[0].fee"), "{}", stderr_of(&out));
}

#[test]
fn rate_prints_both_rates() {
    let dir = TempDir::new().unwrap();
    let state = write(&dir, "state.json", STATE_EX1);
    let oracle = write(&dir, "oracle.json", ORACLE_45);
    let out = cpmm(&["rate", "--state", &state, "--oracle", &oracle, "--pair", "T0,T1"]);
    assert!(out.status.success());
    let text = stdout_of(&out);
    assert!(text.contains("internal 1.4955"), "{text}");
    assert!(text.contains("external 0.8"), "{text}");
}

#[test]
fn arbitrage_solves_and_verifies_example_5() {
    let dir = TempDir::new().unwrap();
    let state = write(&dir, "state.json", STATE_EX5);
    let oracle = write(&dir, "oracle.json", ORACLE_45);
    let out = cpmm(&[
        "arbitrage", "--state", &state, "--oracle", &oracle, "--pair", "T0,T1", "--sender", "A",
        "--verify",
    ]);
    assert!(out.status.success(), "stderr: {}", stderr_of(&out));
    let text = stdout_of(&out);
    let solution: serde_json::Value =
        serde_json::from_str(text.lines().next().unwrap()).unwrap();
    assert_eq!(solution["direction"], serde_json::json!(["T0", "T1"]));
    let x_max = solution["x_max"].as_f64().unwrap();
    assert!((x_max - 9.3013).abs() < 1e-4, "x_max = {x_max}");
    let gain = solution["gain"].as_f64().unwrap();
    assert!((gain - 31.145).abs() < 0.001, "gain = {gain}");
    assert_eq!(solution["enabled"], serde_json::json!(true));
    assert!(text.contains("verify: golden-section discrepancy"), "{text}");
}

#[test]
fn arbitrage_reports_no_mispricing_as_null() {
    let dir = TempDir::new().unwrap();
    // Fee-less pool with prices matching the reserve ratio exactly.
    let state = write(
        &dir,
        "state.json",
        r#"{
          "pools":[{"token0":"T0","token1":"T1","r0":10.0,"r1":30.0,"fee":1.0,"minted_supply":100.0}],
          "wallets":[{"owner":"A","balances":{"T0":30.0},"minted_balances":{}}]
        }"#,
    );
    let oracle = write(&dir, "oracle.json", r#"{"prices":{"T0":3.0,"T1":1.0}}"#);
    let out = cpmm(&[
        "arbitrage", "--state", &state, "--oracle", &oracle, "--pair", "T0,T1", "--sender", "A",
    ]);
    assert!(out.status.success());
    let solution: serde_json::Value =
        serde_json::from_str(stdout_of(&out).lines().next().unwrap()).unwrap();
    assert_eq!(solution["x_max"], serde_json::Value::Null);
    assert_eq!(solution["x_equil"], serde_json::Value::Null);
}

#[test]
fn gain_curve_writes_csv_with_markers() {
    let dir = TempDir::new().unwrap();
    let state = write(&dir, "state.json", STATE_EX5);
    let oracle = write(&dir, "oracle.json", ORACLE_45);
    let out_path = dir.path().join("curve.csv");
    let out = cpmm(&[
        "gain-curve", "--state", &state, "--oracle", &oracle, "--pair", "T0,T1", "--sender", "A",
        "--x-min", "0", "--x-max", "30", "--steps", "3000",
        "--out", out_path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", stderr_of(&out));
    let csv = fs::read_to_string(&out_path).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("x,gain"));
    assert_eq!(csv.lines().filter(|l| !l.starts_with(['x', '#'])).count(), 3000);
    assert!(csv.contains("# x_equil,8.817328637958552"), "{csv}");
    assert!(csv.contains("# x_max,9.30130341208204"), "{csv}");

    // The sampled maximum sits near the closed-form maximizer.
    let best = csv
        .lines()
        .skip(1)
        .filter(|l| !l.starts_with('#'))
        .map(|l| {
            let mut parts = l.split(',');
            let x: f64 = parts.next().unwrap().parse().unwrap();
            let g: f64 = parts.next().unwrap().parse().unwrap();
            (x, g)
        })
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap();
    assert!((best.0 - 9.3013).abs() < 0.02, "peak at {}", best.0);
}

#[test]
fn gain_curve_rejects_empty_range() {
    let dir = TempDir::new().unwrap();
    let state = write(&dir, "state.json", STATE_EX5);
    let oracle = write(&dir, "oracle.json", ORACLE_45);
    let out = cpmm(&[
        "gain-curve", "--state", &state, "--oracle", &oracle, "--pair", "T0,T1", "--sender", "A",
        "--x-min", "5", "--x-max", "5", "--steps", "10",
        "--out", dir.path().join("x.csv").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr_of(&out).contains("invalid range"));
}

#[test]
fn gain_curve_unwritable_path_exits_1() {
    let dir = TempDir::new().unwrap();
    let state = write(&dir, "state.json", STATE_EX5);
    let oracle = write(&dir, "oracle.json", ORACLE_45);
    let out = cpmm(&[
        "gain-curve", "--state", &state, "--oracle", &oracle, "--pair", "T0,T1", "--sender", "A",
        "--x-min", "0", "--x-max", "30", "--steps", "10",
        "--out", "/nonexistent-dir/curve.csv",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn uniswap_check_random_is_deterministic_and_clean() {
    let args = ["uniswap-check", "--random", "200", "--seed", "42"];
    let first = cpmm(&args);
    assert!(first.status.success(), "stderr: {}", stderr_of(&first));
    let second = cpmm(&args);
    assert_eq!(first.stdout, second.stdout, "reports must be byte-identical");

    let records: serde_json::Value = serde_json::from_str(&stdout_of(&first)).unwrap();
    let records = records.as_array().unwrap();
    assert_eq!(records.len(), 200);
    for record in records {
        let d = record["divergence"].as_i64().unwrap();
        assert!(d.abs() <= 1, "divergence {d}");
    }
}

#[test]
fn uniswap_check_accepts_wei_scale_case_file() {
    let dir = TempDir::new().unwrap();
    let cases = write(
        &dir,
        "cases.json",
        r#"[{"amount_in":"10000000000000000000","reserve_in":"40000000000000000000","reserve_out":"60000000000000000000"}]"#,
    );
    let out = cpmm(&["uniswap-check", "--cases", &cases]);
    assert!(out.status.success(), "stderr: {}", stderr_of(&out));
    let records: serde_json::Value = serde_json::from_str(&stdout_of(&out)).unwrap();
    let out_amount: f64 = records[0]["integer_out"].as_str().unwrap().parse().unwrap();
    assert!((out_amount - 11.97e18).abs() < 0.005e18);
    assert_eq!(records[0]["divergence"], serde_json::json!(0));
}

#[test]
fn uniswap_check_malformed_cases_exit_1() {
    let dir = TempDir::new().unwrap();
    let cases = write(&dir, "cases.json", r#"[{"amount_in": true}]"#);
    let out = cpmm(&["uniswap-check", "--cases", &cases]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn missing_file_exits_1() {
    let out = cpmm(&[
        "rate",
        "--state", "/does/not/exist.json",
        "--oracle", "/does/not/exist.json",
        "--pair", "T0,T1",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn state_documents_round_trip_through_simulate() {
    // The printed final state parses back through the loader.
    let dir = TempDir::new().unwrap();
    let state = write(&dir, "state.json", STATE_EX1);
    let oracle = write(&dir, "oracle.json", ORACLE_45);
    let trace = write(
        &dir,
        "trace.json",
        r#"[{"sender":"A","amount_in":10.0,"token_in":"T0","token_out":"T1"}]"#,
    );
    let out = cpmm(&["simulate", "--state", &state, "--oracle", &oracle, "--trace", &trace]);
    let text = stdout_of(&out);
    let final_doc = text
        .lines()
        .find(|l| l.starts_with("final "))
        .unwrap()
        .trim_start_matches("final ");
    let reloaded = write(&dir, "reloaded.json", final_doc);
    let out = cpmm(&["rate", "--state", &reloaded, "--oracle", &oracle, "--pair", "T0,T1"]);
    assert!(out.status.success(), "stderr: {}", stderr_of(&out));
    assert!(Path::new(&reloaded).exists());
}
