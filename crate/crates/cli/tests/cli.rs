//! Binary-level tests: exit-code contract, format plumbing, and
//! determinism of file artifacts.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use crn_llm::mock::{MockExchange, MockLlmServer};

fn crn() -> Command {
    Command::new(env!("CARGO_BIN_EXE_crn"))
}

fn fixture_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join(format!("../core/fixtures/{name}"))
}

fn stdout_of(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn stderr_of(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

#[test]
fn parse_is_format_agnostic_and_canonical() {
    let from_dsl = crn()
        .args(["parse", fixture_path("mono_chain.dsl").to_str().unwrap()])
        .output()
        .unwrap();
    assert!(from_dsl.status.success());
    let from_json = crn()
        .args(["parse", fixture_path("mono_chain.json").to_str().unwrap()])
        .output()
        .unwrap();
    assert!(from_json.status.success());
    assert_eq!(stdout_of(&from_dsl), stdout_of(&from_json));
    assert!(stdout_of(&from_dsl).contains("\"mono_chain_r1\""));
}

#[test]
fn parse_failure_exits_3_and_missing_file_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.dsl");
    std::fs::write(&bad, "r: A -> B k = 1").unwrap();
    let output = crn().args(["parse", bad.to_str().unwrap()]).output().unwrap();
    assert_eq!(output.status.code(), Some(3));
    assert!(stderr_of(&output).contains("expected `;`"));

    let output = crn().args(["parse", "/nonexistent/x.dsl"]).output().unwrap();
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn usage_errors_exit_2() {
    let output = crn().args(["simulate-ssa"]).output().unwrap();
    assert_eq!(output.status.code(), Some(2));
    let output = crn().args(["no-such-command"]).output().unwrap();
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn validate_exit_code_tracks_admissibility() {
    let ok = crn()
        .args(["validate", fixture_path("ding2024.dsl").to_str().unwrap()])
        .output()
        .unwrap();
    assert!(ok.status.success());
    let text = stdout_of(&ok);
    assert!(text.contains("admissible: yes"));
    assert_eq!(text.matches("W01").count(), 3, "three inactive reactions");

    let dir = tempfile::tempdir().unwrap();
    let noop = dir.path().join("noop.dsl");
    std::fs::write(&noop, "species A = 1\nr: A -> A ; k = 1\n").unwrap();
    let bad = crn()
        .args(["validate", noop.to_str().unwrap(), "--json"])
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(3));
    assert!(stdout_of(&bad).contains("\"code\": \"E04\""));
}

#[test]
fn matrix_csv_matches_the_frozen_fixture() {
    let output = crn()
        .args([
            "matrix",
            fixture_path("mono_enzyme.dsl").to_str().unwrap(),
            "--csv",
        ])
        .output()
        .unwrap();
    assert!(output.status.success());
    let expected = std::fs::read_to_string(fixture_path("mono_enzyme.matrix.csv")).unwrap();
    assert_eq!(stdout_of(&output), expected);
}

#[test]
fn simulate_ssa_same_seed_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let status = crn()
            .args([
                "simulate-ssa",
                fixture_path("enzyme.dsl").to_str().unwrap(),
                "--t-end",
                "50",
                "--seed",
                "42",
                "--out",
                out.to_str().unwrap(),
                "--quiet",
            ])
            .status()
            .unwrap();
        assert!(status.success());
        std::fs::read(&out).unwrap()
    };
    let a = run("a.csv");
    let b = run("b.csv");
    assert_eq!(a, b);
    let meta = std::fs::read_to_string(dir.path().join("a.meta.json")).unwrap();
    assert!(meta.contains("chacha8+splitmix64/v1"));
    assert!(meta.contains("\"seed\": 42"));
}

#[test]
fn simulate_ode_reaches_the_analytic_value() {
    let dir = tempfile::tempdir().unwrap();
    let decay = dir.path().join("decay.dsl");
    std::fs::write(&decay, "species A = 100\ndeath: A -> 0 ; k = 1\n").unwrap();
    let output = crn()
        .args([
            "simulate-ode",
            decay.to_str().unwrap(),
            "--t-end",
            "1",
            "--dt",
            "0.001",
            "--grid",
            "2",
        ])
        .output()
        .unwrap();
    assert!(output.status.success());
    let last = stdout_of(&output);
    let last = last.lines().last().unwrap();
    let value: f64 = last.split(',').nth(1).unwrap().parse().unwrap();
    assert!((value - 100.0 * (-1.0f64).exp()).abs() < 1e-3, "A(1) = {value}");
}

#[test]
fn engine_failures_exit_4() {
    let dir = tempfile::tempdir().unwrap();
    let stiff = dir.path().join("stiff.dsl");
    std::fs::write(&stiff, "species A = 100\nr: 2 A -> B ; k = 10\n").unwrap();
    let output = crn()
        .args([
            "simulate-ode",
            stiff.to_str().unwrap(),
            "--t-end",
            "1",
            "--dt",
            "0.5",
        ])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(4));
    assert!(stderr_of(&output).contains("unstable"));
}

#[test]
fn ensemble_writes_csv_and_metadata() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("ens");
    let status = crn()
        .args([
            "ensemble",
            fixture_path("mono_chain.dsl").to_str().unwrap(),
            "--runs",
            "10",
            "--t-end",
            "5",
            "--grid",
            "11",
            "--seed",
            "7",
            "--out-dir",
            out_dir.to_str().unwrap(),
            "--quiet",
        ])
        .status()
        .unwrap();
    assert!(status.success());
    let csv = std::fs::read_to_string(out_dir.join("ensemble.csv")).unwrap();
    let header = csv.lines().next().unwrap();
    assert!(header.starts_with("time,A_mean,A_std,A_p05,A_p50,A_p95,B_mean"));
    assert_eq!(csv.lines().count(), 1 + 11);
    let meta = std::fs::read_to_string(out_dir.join("ensemble_meta.json")).unwrap();
    assert!(meta.contains("\"n_runs\": 10"));
    assert!(meta.contains("\"base_seed\": 7"));
}

#[test]
fn export_sbml_round_trips_through_the_importer() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("model.xml");
    let status = crn()
        .args([
            "export-sbml",
            fixture_path("ding2024.dsl").to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "--quiet",
        ])
        .status()
        .unwrap();
    assert!(status.success());
    let bytes = std::fs::read(&out).unwrap();
    let reimported = crn_core::sbml::import_sbml_subset(&bytes).unwrap();
    assert_eq!(reimported, crn_core::fixtures::load_fixture("ding2024").unwrap());
}

#[test]
fn from_text_uses_the_mock_endpoint_and_writes_a_transcript() {
    let table = crn_core::fixtures::fixture_table_json("mono_chain").unwrap();
    let server = MockLlmServer::start(vec![MockExchange::new(table)]);
    let dir = tempfile::tempdir().unwrap();
    let prose = dir.path().join("prose.txt");
    std::fs::write(&prose, "A turns into B, B into C_mono, C_mono into D.").unwrap();
    let transcript = dir.path().join("transcript.json");
    let output = crn()
        .args([
            "from-text",
            prose.to_str().unwrap(),
            "--transcript",
            transcript.to_str().unwrap(),
            "--quiet",
        ])
        .env("CRN_LLM_BASE_URL", server.base_url())
        .env("CRN_LLM_MODEL", "mock-model")
        .env("CRN_LLM_API_KEY", "sk-TESTSECRET")
        .output()
        .unwrap();
    assert!(output.status.success(), "stderr: {}", stderr_of(&output));
    // Stdout carries the canonical table; equal to parsing the fixture directly.
    let direct = crn()
        .args(["parse", fixture_path("mono_chain.json").to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(stdout_of(&output), stdout_of(&direct));
    let transcript_json = std::fs::read_to_string(&transcript).unwrap();
    assert!(transcript_json.contains("\"parse_outcome\": \"ok\""));
    assert!(!transcript_json.contains("TESTSECRET"));
}

#[test]
fn from_text_without_endpoint_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let prose = dir.path().join("prose.txt");
    std::fs::write(&prose, "something").unwrap();
    let output = crn()
        .args(["from-text", prose.to_str().unwrap()])
        .env_remove("CRN_LLM_BASE_URL")
        .env_remove("CRN_LLM_MODEL")
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn extraction_failure_exits_5_with_transcript() {
    let server = MockLlmServer::start(vec![MockExchange::new(
        r#"{"species": [], "reactions": []}"#,
    )]);
    let dir = tempfile::tempdir().unwrap();
    let prose = dir.path().join("prose.txt");
    std::fs::write(&prose, "an empty system").unwrap();
    let transcript = dir.path().join("t.json");
    let output = crn()
        .args([
            "from-text",
            prose.to_str().unwrap(),
            "--transcript",
            transcript.to_str().unwrap(),
            "--max-repair-rounds",
            "0",
        ])
        .env("CRN_LLM_BASE_URL", server.base_url())
        .env("CRN_LLM_MODEL", "mock-model")
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(5));
    let transcript_json = std::fs::read_to_string(&transcript).unwrap();
    assert_eq!(transcript_json.matches("\"prompt\"").count(), 1, "one round");
    assert!(transcript_json.contains("failed"));
}

#[test]
fn pipeline_from_table_writes_the_full_artifact_set() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("run");
    let status = crn()
        .args([
            "pipeline",
            "--from-table",
            fixture_path("mono_chain.json").to_str().unwrap(),
            "--out-dir",
            out_dir.to_str().unwrap(),
            "--seed",
            "11",
            "--runs",
            "20",
            "--t-end",
            "5",
            "--grid",
            "21",
            "--quiet",
        ])
        .status()
        .unwrap();
    assert!(status.success());
    for artifact in [
        "kinetic_table.json",
        "validation.json",
        "matrix.csv",
        "ensemble.csv",
        "ensemble_meta.json",
        "model.xml",
        "plot_all_species.svg",
        "plot_A.svg",
        "manifest.json",
    ] {
        assert!(out_dir.join(artifact).exists(), "missing {artifact}");
    }
    let manifest = std::fs::read_to_string(out_dir.join("manifest.json")).unwrap();
    assert!(manifest.contains("\"seed\": 11"));
    assert!(manifest.contains("\"kind\": \"table\""));
    assert!(manifest.contains("chacha8+splitmix64/v1"));
}

#[test]
fn pipeline_without_any_source_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let output = crn()
        .args(["pipeline", "--out-dir", dir.path().to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
}
