//! End-to-end behavior of the command line front end: exit codes,
//! config errors, seed overrides, and the report schema.

use std::path::Path;
use std::process::{Command, Output};

fn run_cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_occusim")).args(args).output().unwrap()
}

fn write(path: &Path, content: &str) {
    std::fs::write(path, content).unwrap();
}

const IDENTITY_CONFIG: &str = r#"{
    "generator": [[-1.0, 1.0], [2.0, -2.0]],
    "alpha": 1.0,
    "n_grid": [1],
    "horizon": 1.0,
    "replications": 100,
    "master_seed": 12
}"#;

#[test]
fn missing_config_file_exits_with_error_code() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_cli(&[
        "identities",
        "--config",
        dir.path().join("nope.json").to_str().unwrap(),
        "--out",
        dir.path().join("out").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
}

#[test]
fn unknown_config_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.json");
    write(
        &config,
        r#"{
            "generator": [[-1.0, 1.0], [1.0, -1.0]],
            "alpha": 1.0,
            "n_grid": [1],
            "horizon": 1.0,
            "replications": 100,
            "master_seed": 1,
            "horizont": 2.0
        }"#,
    );
    let out = run_cli(&[
        "identities",
        "--config",
        config.to_str().unwrap(),
        "--out",
        dir.path().join("out").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("horizont"));
}

#[test]
fn seed_flag_overrides_the_config_seed() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("identities.json");
    write(&config, IDENTITY_CONFIG);
    let mut csvs = Vec::new();
    for (run, seed) in [(0, "31"), (1, "32"), (2, "31")] {
        let out_dir = dir.path().join(format!("out{run}"));
        let out = run_cli(&[
            "identities",
            "--config",
            config.to_str().unwrap(),
            "--out",
            out_dir.to_str().unwrap(),
            "--seed",
            seed,
        ]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        let summary = std::fs::read_to_string(out_dir.join("identities_summary.txt")).unwrap();
        assert!(summary.contains(&format!("master seed: {seed}")));
        csvs.push(std::fs::read_to_string(out_dir.join("identities.csv")).unwrap());
    }
    assert_eq!(csvs[0], csvs[2], "same seed must reproduce the report");
    assert_ne!(csvs[0], csvs[1], "the random batch must react to the seed");
}

#[test]
fn reports_follow_the_documented_schema() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("fclt.json");
    write(
        &config,
        r#"{
            "generator": [[-1.0, 1.0], [1.0, -1.0]],
            "alpha": 1.0,
            "n_grid": [3],
            "horizon": 0.5,
            "replications": 200,
            "master_seed": 8,
            "init": "stationary"
        }"#,
    );
    let out_dir = dir.path().join("out");
    let out = run_cli(&[
        "fclt",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.code() == Some(0) || out.status.code() == Some(1));
    let csv = std::fs::read_to_string(out_dir.join("fclt.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("n,statistic,value,target,stderr,pass"));
    let mut rows = 0;
    for line in lines {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields.len(), 6, "bad row: {line}");
        fields[0].parse::<u64>().unwrap();
        for field in &fields[2..5] {
            field.parse::<f64>().unwrap();
        }
        assert!(fields[5] == "true" || fields[5] == "false");
        rows += 1;
    }
    assert_eq!(rows, 12);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("experiment: fclt"));
}

#[test]
fn csv_generator_sources_resolve_relative_to_the_config() {
    let dir = tempfile::tempdir().unwrap();
    write(&dir.path().join("chain.csv"), "-1.0,1.0\n2.0,-2.0\n");
    let config = dir.path().join("identities.json");
    write(
        &config,
        r#"{
            "generator": {"csv": "chain.csv"},
            "alpha": 1.0,
            "n_grid": [1],
            "horizon": 1.0,
            "replications": 100,
            "master_seed": 3
        }"#,
    );
    let out_dir = dir.path().join("out");
    let out = run_cli(&[
        "identities",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out_dir.join("identities.csv").exists());
}

#[test]
fn bv_subcommand_runs_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bv.json");
    write(
        &config,
        r#"{
            "generator": [[-1.0, 1.0], [1.0, -1.0]],
            "alpha": 1.0,
            "n_grid": [2],
            "horizon": 2.0,
            "replications": 100,
            "master_seed": 90
        }"#,
    );
    let out_dir = dir.path().join("out");
    let out = run_cli(&[
        "bv",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(out_dir.join("bv.csv")).unwrap();
    assert_eq!(csv.lines().count(), 5);
    assert!(csv.contains("bv_alternating_min_slack"));
}
