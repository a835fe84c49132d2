use std::process::Command;

use serde_json::Value;
use symtest::cli::{format_hex, parse_hex};

fn symtest(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_symtest"))
        .args(args)
        .env("SYMTEST_THREADS", "2")
        .output()
        .expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn rows(stdout: &str) -> Vec<Value> {
    let v: Value = serde_json::from_str(stdout).expect("json report");
    assert_eq!(v["schema"], 1);
    v["rows"].as_array().unwrap().clone()
}

#[test]
fn bose_report_has_both_values() {
    let (code, out, _) = symtest(&["bose", "--state", "mixed:4", "--group", "sym:2"]);
    assert_eq!(code, 0);
    let r = rows(&out);
    assert_eq!(r[0]["method"], "circuit-vs-projector");
    assert!((r[0]["simulated"].as_f64().unwrap() - 0.75).abs() < 1e-12);
    assert!(r[0]["abs_diff"].as_f64().unwrap() < 1e-10);
}

#[test]
fn same_seed_same_bytes() {
    let args = [
        "gsym", "--state", "random:4,4,2", "--group", "d3-cnot-swap", "--restarts", "3", "--seed", "11",
    ];
    let a = symtest(&args);
    let b = symtest(&args);
    assert_eq!(a.0, 0);
    assert_eq!(a.1, b.1);
    let c = symtest(&["bose", "--state", "random:4", "--group", "sym:2", "--shots", "500", "--seed", "3"]);
    let d = symtest(&["bose", "--state", "random:4", "--group", "sym:2", "--shots", "500", "--seed", "3"]);
    assert_eq!(c.1, d.1);
}

#[test]
fn thread_count_does_not_change_results() {
    let args = ["gse", "--state", "random:4,2,2", "--group", "kext:2", "--restarts", "3", "--seed", "5"];
    let one = Command::new(env!("CARGO_BIN_EXE_symtest"))
        .args(args)
        .env("SYMTEST_THREADS", "1")
        .output()
        .unwrap();
    let (_, many, _) = symtest(&args);
    assert_eq!(String::from_utf8_lossy(&one.stdout), many);
}

#[test]
fn sep_csv_columns() {
    let (code, out, _) = symtest(&["--format", "csv", "sep", "--state", "w:3-reduced", "--group", "sym,cyc", "--k", "2..4"]);
    assert_eq!(code, 0);
    let mut lines = out.lines();
    assert_eq!(lines.next().unwrap(), "k,group,p,cswaps,ratio,method");
    assert_eq!(lines.count(), 6);
}

#[test]
fn separable_ratio_is_null() {
    let (code, out, _) = symtest(&["sep", "--state", "bell", "--group", "sym", "--k", "2"]);
    assert_eq!(code, 0);
    let r = rows(&out);
    assert!(r[0]["ratio"].is_null());
}

#[test]
fn hex_output_round_trips() {
    let (code, out, _) = symtest(&["--hex", "bose", "--state", "mixed:4", "--group", "sym:2"]);
    assert_eq!(code, 0);
    let r = rows(&out);
    let s = r[0]["simulated"].as_str().unwrap();
    assert!((parse_hex(s).unwrap() - 0.75).abs() < 1e-15);
    assert_eq!(format_hex(0.75), "0x1.8p-1");
}

#[test]
fn invalid_input_exits_2() {
    let (code, _, err) = symtest(&["bose", "--state", "nope", "--group", "sym:2"]);
    assert_eq!(code, 2);
    assert!(err.contains("error"));
    // mismatched dimensions
    let (code, _, _) = symtest(&["bose", "--state", "mixed:3", "--group", "sym:2"]);
    assert_eq!(code, 2);
    let (code, _, _) = symtest(&["ham", "--ham", "tim:3", "--group", "phase:2"]);
    assert_eq!(code, 2);
    let (code, _, _) = symtest(&["frobnicate"]);
    assert_eq!(code, 2);
}

#[test]
fn state_file_input() {
    let dir = std::env::temp_dir().join(format!("symtest-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("state.json");
    std::fs::write(
        &path,
        r#"{"vector": [[0, 0], ["0x1.6a09e667f3bcdp-1", 0], [-0.7071067811865476, 0], [0, 0]], "dims": [2, 2]}"#,
    )
    .unwrap();
    let spec = format!("file:{}", path.display());
    let (code, out, _) = symtest(&["bose", "--state", &spec, "--group", "sym:2"]);
    assert_eq!(code, 0, "{out}");
    let r = rows(&out);
    // the singlet is antisymmetric
    assert!(r[0]["simulated"].as_f64().unwrap().abs() < 1e-12);
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn unconverged_optimizer_exits_3_with_report() {
    let dir = std::env::temp_dir().join(format!("symtest-nc-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("r.json");
    let (code, _, err) = symtest(&[
        "gsym", "--state", "random:4,4,2", "--group", "d3-cnot-swap", "--max-iters", "1", "--restarts", "1",
        "-o", path.to_str().unwrap(),
    ]);
    assert_eq!(code, 3, "{err}");
    let text = std::fs::read_to_string(&path).unwrap();
    let r = rows(&text);
    assert_eq!(r[0]["converged"], false);
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn ham_and_sweep_commands() {
    let (code, out, _) = symtest(&["ham", "--ham", "nmr:1,2,0.5", "--group", "z2xz2-pauli", "--t", "0.1,0.5,1"]);
    assert_eq!(code, 0);
    for r in rows(&out) {
        assert!((r["simulated"].as_f64().unwrap() - 1.0).abs() < 1e-10);
    }
    let (code, out, _) = symtest(&["--format", "csv", "sweep", "--figure", "sep-decrease", "--k", "2..4"]);
    assert_eq!(code, 0);
    assert!(out.starts_with("k,method,state,p"));
    let (code, out, _) = symtest(&["dqc1", "--unitary", "random:4", "--seed", "9"]);
    assert_eq!(code, 0);
    assert!(rows(&out)[0]["abs_diff"].as_f64().unwrap() < 1e-10);
}

#[test]
fn shots_require_a_seed() {
    let (code, _, err) = symtest(&["bose", "--state", "bell", "--group", "sym:2", "--shots", "100"]);
    assert_eq!(code, 2);
    assert!(err.contains("--seed"));
    let (code, _, _) = symtest(&["bose", "--state", "bell", "--group", "sym:2", "--shots", "100", "--seed", "0"]);
    assert_eq!(code, 0);
}

#[test]
fn non_hermitian_file_reports_defect() {
    let dir = std::env::temp_dir().join(format!("symtest-nh-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("h.json");
    std::fs::write(&path, r#"{"dense": [[[1, 0], [0.5, 0]], [[0, 0], [-1, 0]]]}"#).unwrap();
    let spec = format!("file:{}", path.display());
    let (code, _, err) = symtest(&["ham", "--ham", &spec, "--group", "trivial:2", "--t", "0.5"]);
    assert_eq!(code, 2);
    assert!(err.contains("not Hermitian") && err.contains("defect"), "{err}");
    let _ = std::fs::remove_dir_all(&dir);
}
