use std::path::PathBuf;
use std::process::{Command, Output};

const HEADER: &str =
    "scenario,agent,n_agvs,source_clock_s,throughput_pph,total_parts,deadlocked,sim_seconds,wall_seconds,seed";

fn plantsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_plantsim"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(out: &Output) -> String {
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status,
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn scenario_file(name: &str) -> String {
    let path: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "core", "scenarios", name]
        .iter()
        .collect();
    path.to_string_lossy().into_owned()
}

fn rows(text: &str) -> Vec<csv::StringRecord> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    assert_eq!(
        r.headers().unwrap().iter().collect::<Vec<_>>().join(","),
        HEADER
    );
    r.records().map(Result::unwrap).collect()
}

#[test]
fn simulate_prints_one_metrics_row() {
    let config = scenario_file("mayer.json");
    let out = plantsim(&[
        "simulate",
        "--config",
        &config,
        "--agent",
        "cost-table",
        "--horizon-hours",
        "1",
        "--source-clock",
        "60",
        "--seed",
        "3",
    ]);
    let text = stdout(&out);
    let rows = rows(&text);
    assert_eq!(rows.len(), 1);
    assert_eq!(&rows[0][1], "cost-table");
    assert_eq!(&rows[0][2], "1");
    assert_eq!(rows[0][3].parse::<f64>().unwrap(), 60.0);
    assert_eq!(&rows[0][9], "3");
}

#[test]
fn simulate_writes_trace_and_overrides_fleet() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.jsonl");
    let config = scenario_file("grid-2.json");
    let out = plantsim(&[
        "simulate",
        "--config",
        &config,
        "--agent",
        "fifo",
        "--agvs",
        "3",
        "--horizon-hours",
        "0.5",
        "--trace",
        trace.to_str().unwrap(),
    ]);
    let rows = rows(&stdout(&out));
    assert_eq!(&rows[0][2], "3");
    let text = std::fs::read_to_string(&trace).unwrap();
    assert!(text.lines().count() > 10);
    for line in text.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert!(v["t"].is_number() && v["kind"].is_string());
    }
}

#[test]
fn bad_config_path_fails() {
    let out = plantsim(&[
        "simulate",
        "--config",
        "/no/such/file.json",
        "--agent",
        "fifo",
    ]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
}

#[test]
fn malformed_config_fails() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, r#"{"nodes": []}"#).unwrap();
    let out = plantsim(&[
        "simulate",
        "--config",
        path.to_str().unwrap(),
        "--agent",
        "nn",
    ]);
    assert!(!out.status.success());
}

#[test]
fn ddqn_without_checkpoint_fails() {
    let config = scenario_file("mayer.json");
    let out = plantsim(&["simulate", "--config", &config, "--agent", "ddqn"]);
    assert!(!out.status.success());
}

#[test]
fn unknown_agent_is_rejected() {
    let config = scenario_file("mayer.json");
    let out = plantsim(&["simulate", "--config", &config, "--agent", "random"]);
    assert!(!out.status.success());
}

#[test]
fn search_clock_prints_a_clock() {
    let config = scenario_file("mayer.json");
    let out = plantsim(&[
        "search-clock",
        "--config",
        &config,
        "--agent",
        "fifo",
        "--lo",
        "0",
        "--hi",
        "200",
        "--horizon-hours",
        "1",
    ]);
    let clock: u32 = stdout(&out).trim().parse().unwrap();
    assert!(clock <= 200);
}

#[test]
fn search_clock_without_safe_clock_fails() {
    let config = scenario_file("mayer.json");
    let out = plantsim(&[
        "search-clock",
        "--config",
        &config,
        "--agent",
        "fifo",
        "--lo",
        "0",
        "--hi",
        "0",
    ]);
    assert!(!out.status.success());
}

#[test]
fn train_then_evaluate() {
    let dir = tempfile::tempdir().unwrap();
    let hyper = dir.path().join("hyper.json");
    std::fs::write(&hyper, r#"{"batch_size": 8, "reward_scale": 0.001}"#).unwrap();
    let out_dir = dir.path().join("run");
    let out = plantsim(&[
        "train",
        "--scenario",
        "mayer",
        "--episodes",
        "2",
        "--horizon-hours",
        "0.1",
        "--hyper",
        hyper.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    stdout(&out);
    let ckpt = out_dir.join("model.ckpt");
    assert!(ckpt.exists());
    let curve = std::fs::read_to_string(out_dir.join("learning_curve.csv")).unwrap();
    assert_eq!(curve.lines().count(), 3);

    let out = plantsim(&[
        "evaluate",
        "--scenario",
        "mayer",
        "--checkpoint",
        ckpt.to_str().unwrap(),
        "--horizon-hours",
        "0.5",
    ]);
    let rows = rows(&stdout(&out));
    assert_eq!(rows.len(), 1);
    assert_eq!(&rows[0][0], "mayer");
    assert_eq!(&rows[0][1], "ddqn");

    let out = plantsim(&[
        "evaluate",
        "--scenario",
        "grid-2",
        "--checkpoint",
        ckpt.to_str().unwrap(),
    ]);
    assert!(!out.status.success());
}

#[test]
fn train_rejects_unknown_hyperparameter() {
    let dir = tempfile::tempdir().unwrap();
    let hyper = dir.path().join("hyper.json");
    std::fs::write(&hyper, r#"{"learning_rat": 0.1}"#).unwrap();
    let out = plantsim(&[
        "train",
        "--scenario",
        "mayer",
        "--episodes",
        "1",
        "--hyper",
        hyper.to_str().unwrap(),
        "--out",
        dir.path().join("run").to_str().unwrap(),
    ]);
    assert!(!out.status.success());
}

#[test]
fn evaluate_missing_checkpoint_fails() {
    let out = plantsim(&[
        "evaluate",
        "--scenario",
        "mayer",
        "--checkpoint",
        "/no/such.ckpt",
    ]);
    assert!(!out.status.success());
}

#[test]
fn benchmark_subset() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("results.csv");
    let run = || {
        let out = plantsim(&[
            "benchmark",
            "--out",
            csv_path.to_str().unwrap(),
            "--scenarios",
            "mayer",
            "--agents",
            "fifo,nn,ddqn",
            "--horizon-hours",
            "1",
            "--no-wall-time",
            "--checkpoints",
            dir.path().join("none").to_str().unwrap(),
        ]);
        let summary = stdout(&out);
        assert!(summary.contains("mayer"));
        assert!(String::from_utf8_lossy(&out.stderr).contains("ddqn"));
        std::fs::read(&csv_path).unwrap()
    };
    let first = run();
    let rows = rows(std::str::from_utf8(&first).unwrap());
    assert_eq!(rows.len(), 2);
    assert_eq!(&rows[0][1], "fifo");
    assert_eq!(&rows[1][1], "nn");
    assert!(rows.iter().all(|r| &r[8] == "0.0" || &r[8] == "0"));
    assert_eq!(first, run());
}

#[test]
fn benchmark_unknown_scenario_fails() {
    let dir = tempfile::tempdir().unwrap();
    let out = plantsim(&[
        "benchmark",
        "--out",
        dir.path().join("r.csv").to_str().unwrap(),
        "--scenarios",
        "nope",
    ]);
    assert!(!out.status.success());
}
