//! End-to-end CLI checks: exit codes, artifact layout, config validation.

use std::path::Path;
use std::process::{Command, Output};

fn steersim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_steersim"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn validate_default_config_succeeds_and_flags_capacities() {
    let out = steersim(&["validate"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("selection.gnb_capacity_users = 30 [non-paper default]"));
    assert!(text.contains("selection.wifi_capacity_users = 3 [non-paper default]"));
    assert!(text.contains("nr.bandwidth_mhz = 60.0 [table]"));
    assert!(text.contains("ok"));
}

#[test]
fn validate_rejects_unknown_keys_with_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "[nr]\nbandwith_mhz = 60.0\n").unwrap();
    let out = steersim(&["--config", cfg.to_str().unwrap(), "validate"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("bandwith_mhz"), "{}", stderr(&out));
}

#[test]
fn validate_names_the_broken_case() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "[cases.case_d]\ns1 = 30\ns2 = 30\ns3 = 10\ns4 = 9\n").unwrap();
    let out = steersim(&["--config", cfg.to_str().unwrap(), "validate"]);
    assert_eq!(out.status.code(), Some(1));
    let err = stderr(&out);
    assert!(err.contains("case_d") && err.contains("79"), "{err}");
}

#[test]
fn committed_default_config_matches_builtin_defaults() {
    let repo_cfg = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs/default.toml");
    let text = std::fs::read_to_string(repo_cfg).unwrap();
    let parsed = steersim_core_config(&text);
    assert_eq!(parsed, steersim_default());
}

fn steersim_core_config(text: &str) -> String {
    // Round-trip through the validate output to compare effective values.
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    std::fs::write(&cfg, text).unwrap();
    let out = steersim(&["--config", cfg.to_str().unwrap(), "validate"]);
    assert!(out.status.success(), "{}", stderr(&out));
    stdout(&out)
}

fn steersim_default() -> String {
    let out = steersim(&["validate"]);
    assert!(out.status.success());
    stdout(&out)
}

#[test]
fn downlink_cases_smoke_run_writes_all_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("res");
    let out = steersim(&[
        "--out",
        out_dir.to_str().unwrap(),
        "--seeds",
        "1",
        "downlink-cases",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let raw = std::fs::read_to_string(out_dir.join("downlink-raw.csv")).unwrap();
    let agg = std::fs::read_to_string(out_dir.join("downlink-aggregate.csv")).unwrap();
    assert!(out_dir.join("downlink-summary.txt").exists());
    assert!(raw.starts_with("build,config_hash,master_seed,seed,case,policy,topology_hash,metric,value"));
    // 5 cases x 2 policies x 1 seed, multiple metrics each.
    let data_lines = raw.lines().count() - 1;
    assert!(data_lines >= 5 * 2 * 10, "{data_lines}");
    assert!(agg.lines().count() > 10);
    // No stray temp files.
    assert!(!out_dir.join("downlink-raw.tmp").exists());
}

#[test]
fn single_run_exports_traces() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("res");
    let traces = dir.path().join("traces.ndjson");
    let out = steersim(&[
        "--out",
        out_dir.to_str().unwrap(),
        "--seed-list",
        "3",
        "single",
        "--scenario",
        "case-b",
        "--policy",
        "baseline-3gpp",
        "--trace-out",
        traces.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let nd = std::fs::read_to_string(&traces).unwrap();
    assert!(nd.lines().count() > 80 * 10);
    let first: serde_json::Value = serde_json::from_str(nd.lines().next().unwrap()).unwrap();
    assert_eq!(first["event"], "rrc-setup-request");
}

#[test]
fn unknown_scenario_or_policy_fails_with_exit_2() {
    let out = steersim(&["single", "--scenario", "case-z"]);
    assert_eq!(out.status.code(), Some(2));
    let out = steersim(&["single", "--policy", "magic"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("flow-controlled"));
}

#[test]
fn unwritable_output_fails_without_partial_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("blocked");
    std::fs::write(&blocker, b"a file, not a directory").unwrap();
    let out_dir = blocker.join("res");
    let out = steersim(&[
        "--out",
        out_dir.to_str().unwrap(),
        "--seed-list",
        "1",
        "single",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out_dir.exists());
}

#[test]
fn results_are_identical_regardless_of_worker_count() {
    let dir = tempfile::tempdir().unwrap();
    let run = |jobs: &str, sub: &str| {
        let out_dir = dir.path().join(sub);
        let out = steersim(&[
            "--out",
            out_dir.to_str().unwrap(),
            "--seed-list",
            "1,2,3",
            "--jobs",
            jobs,
            "single",
            "--scenario",
            "case-d",
        ]);
        assert!(out.status.success(), "{}", stderr(&out));
        std::fs::read(out_dir.join("single-raw.csv")).unwrap()
    };
    assert_eq!(run("1", "serial"), run("4", "parallel"));
}

#[test]
fn dump_topology_writes_one_row_per_ue() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("topo.csv");
    let out = steersim(&[
        "dump-topology",
        "--seed",
        "7",
        "--file",
        file.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = std::fs::read_to_string(&file).unwrap();
    assert_eq!(text.lines().count(), 81);
    assert!(text.starts_with("ue_id,x,y,ap_id,dual_connected"));
}

#[test]
fn seed_list_and_seed_count_control_the_runs() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("res");
    let out = steersim(&[
        "--out",
        out_dir.to_str().unwrap(),
        "--seed-list",
        "5,9",
        "--jobs",
        "2",
        "single",
        "--scenario",
        "case-a",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let raw = std::fs::read_to_string(out_dir.join("single-raw.csv")).unwrap();
    let seeds: std::collections::BTreeSet<&str> = raw
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(3).unwrap())
        .collect();
    assert_eq!(seeds.into_iter().collect::<Vec<_>>(), vec!["5", "9"]);
}
