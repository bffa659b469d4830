use std::path::Path;
use std::process::{Command, Output};

use flm_core::experiment::{runtime_moments, ReplicateRecord};
use flm_core::output::{read_levels_csv, read_replicates_csv};
use serde_json::Value;

fn flm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_flm"))
        .args(args)
        .env_remove("FLM_THREADS")
        .output()
        .unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn json(out: &Output) -> Value {
    assert_eq!(code(out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(code(&flm(&["frobnicate"])), 2);
    assert_eq!(code(&flm(&["bounds", "--n", "ten"])), 2);
    assert_eq!(code(&flm(&[])), 2);
    assert_eq!(code(&flm(&["--help"])), 0);
}

#[test]
fn invalid_input_exits_one() {
    let out = flm(&["bounds", "--benchmark", "onemax", "--n", "0"]);
    assert_eq!(code(&out), 1);
    assert!(!out.stderr.is_empty());
    assert_eq!(code(&flm(&["bounds", "--benchmark", "onemax", "--n", "10", "--p", "1.5"])), 1);
    assert_eq!(code(&flm(&["simulate", "--benchmark", "jump", "--n", "10"])), 1);
    assert_eq!(code(&flm(&["oracle", "--benchmark", "onemax", "--n", "10", "--init", "level:11"])), 1);
    assert_eq!(code(&flm(&["path-check", "--n", "8", "--k", "3"])), 1);
}

#[test]
fn bounds_json_for_onemax() {
    let v = json(&flm(&["bounds", "--benchmark", "onemax", "--n", "100", "--from", "0", "--to", "100"]));
    let text = v.to_string();
    for key in ["tilde_T", "tilde_T_plus", "tilde_T_minus", "thm_lower", "e_n"] {
        assert!(text.contains(&format!("\"{key}\"")), "missing {key}: {text}");
    }
}

#[test]
fn bounds_json_for_leadingones_has_exact_value() {
    let v = json(&flm(&["bounds", "--benchmark", "leadingones", "--n", "100"]));
    assert!(v.to_string().contains("leadingones-exact"));
}

#[test]
fn path_check_text_output() {
    let out = flm(&["path-check", "--n", "8", "--k", "2"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().any(|l| l == "points=31"), "{text}");
    assert!(text.lines().any(|l| l == "passed=true"));
    let v = json(&flm(&["path-check", "--n", "8", "--k", "2", "--format", "json"]));
    assert_eq!(v["passed"], Value::Bool(true));
}

#[test]
fn oracle_leadingones_visit_probabilities() {
    let v = json(&flm(&["oracle", "--benchmark", "leadingones", "--n", "8"]));
    let visits = v["v"].as_array().unwrap();
    for x in &visits[1..visits.len() - 1] {
        assert!((x.as_f64().unwrap() - 0.5).abs() < 1e-12);
    }
}

const SIM: &[&str] = &[
    "simulate",
    "--benchmark",
    "onemax",
    "--n",
    "20",
    "--replicates",
    "64",
    "--seed",
    "99",
];

#[test]
fn simulate_is_thread_invariant() {
    let base = flm(SIM);
    assert_eq!(code(&base), 0);
    for t in ["1", "3", "8"] {
        let mut args = SIM.to_vec();
        args.extend(["--threads", t]);
        assert_eq!(flm(&args).stdout, base.stdout, "threads={t}");
    }
    let env = Command::new(env!("CARGO_BIN_EXE_flm"))
        .args(SIM)
        .env("FLM_THREADS", "5")
        .output()
        .unwrap();
    assert_eq!(env.stdout, base.stdout);
    let bad = Command::new(env!("CARGO_BIN_EXE_flm"))
        .args(SIM)
        .env("FLM_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(code(&bad), 1);
}

#[test]
fn seeds_change_the_runs() {
    let mut args = SIM.to_vec();
    args[8] = "100";
    assert_ne!(flm(&args).stdout, flm(SIM).stdout);
}

#[test]
fn csv_files_round_trip_and_reproduce_aggregates() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("runs.csv");
    let out_s = out.to_str().unwrap();
    let mut args = SIM.to_vec();
    args.extend(["--format", "csv", "--out", out_s]);
    assert_eq!(code(&flm(&args)), 0);
    let records: Vec<ReplicateRecord> = read_replicates_csv(std::fs::File::open(&out).unwrap()).unwrap();
    assert_eq!(records.len(), 64);
    let levels_file = Path::new(&format!("{out_s}.levels.csv")).to_path_buf();
    let levels = read_levels_csv(std::fs::File::open(&levels_file).unwrap()).unwrap();
    assert_eq!(levels.len(), 21);

    let stats = json(&flm(SIM));
    let runtimes: Vec<u64> = records.iter().map(|r| r.runtime).collect();
    let (mean, var, se) = runtime_moments(&runtimes);
    let s = &stats["statistics"];
    for (name, ours) in [("mean", mean), ("variance", var), ("std_error", se)] {
        let theirs = s[name].as_f64().unwrap();
        assert!((ours - theirs).abs() <= 1e-12 * theirs.abs().max(1.0), "{name}");
    }
    let json_levels = s["levels"].as_array().unwrap();
    for (row, j) in levels.iter().zip(json_levels) {
        assert_eq!(row.visit_freq, j["visit_freq"].as_f64().unwrap());
        assert_eq!(row.leave_rate, j["leave_rate"].as_f64());
    }
    // The top level is never left.
    assert_eq!(levels.last().unwrap().leave_rate, None);
}

#[test]
fn csv_stdout_has_two_tables() {
    let mut args = SIM.to_vec();
    args.extend(["--format", "csv"]);
    let out = flm(&args);
    let text = String::from_utf8(out.stdout).unwrap();
    let (runs, levels) = text.split_once("\n\n").unwrap();
    assert!(runs.starts_with("replicate,runtime,hit_optimum\n"));
    assert!(levels.starts_with("level,visit_freq,leave_rate,mean_sojourn\n"));
}

#[test]
fn config_file_supplies_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(
        &cfg,
        r#"{"benchmark": "onemax", "n": 20, "replicates": 64, "seed": 99, "threads": 2}"#,
    )
    .unwrap();
    let from_file = flm(&["simulate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(from_file.stdout, flm(SIM).stdout);
    // Flags win over the file.
    let overridden = flm(&["simulate", "--config", cfg.to_str().unwrap(), "--n", "10"]);
    let v = json(&overridden);
    assert_eq!(v["config"]["n"], 10);

    std::fs::write(&cfg, r#"{"benchmark": "onemax", "nn": 20}"#).unwrap();
    assert_eq!(code(&flm(&["simulate", "--config", cfg.to_str().unwrap()])), 1);
}

#[test]
fn compare_passes_on_consistent_setups() {
    for args in [
        vec!["compare", "--benchmark", "leadingones", "--n", "30", "--replicates", "300"],
        vec!["compare", "--benchmark", "onemax", "--n", "30", "--init", "level:10", "--to", "30", "--replicates", "300"],
        vec!["compare", "--benchmark", "onemax", "--n", "40", "--replicates", "300", "--seed", "11"],
        vec!["compare", "--benchmark", "jump", "--n", "8", "--k", "2", "--replicates", "300"],
        vec!["compare", "--benchmark", "longpath", "--n", "8", "--k", "2", "--replicates", "200"],
    ] {
        let out = flm(&args);
        assert_eq!(code(&out), 0, "{args:?}: {}", String::from_utf8_lossy(&out.stdout));
        let v: Value = serde_json::from_slice(&out.stdout).unwrap();
        assert_eq!(v["verdict"], "PASS");
    }
}

#[test]
fn compare_csv_lists_verdicts() {
    let out = flm(&["compare", "--benchmark", "leadingones", "--n", "20", "--replicates", "100", "--format", "csv"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("quantity,empirical,std_error,theoretical,verdict\n"), "{text}");
    assert!(text.contains(",INFO"));
}
