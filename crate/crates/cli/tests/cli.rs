use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const SMALL: &str = r#"
seeds = [3, 4]

[plan]
initial_iters = 100
num_boot_phases = 2
t_per_phase = 150

[scripted]
size = 40
corruption_rate = 0.1
"#;

fn rucb(args: &[&str], env_root: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_rucb"));
    cmd.args(args).env_remove("RUCB_OUTPUT_ROOT");
    if let Some(root) = env_root {
        cmd.env("RUCB_OUTPUT_ROOT", root);
    }
    cmd.output().expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("config.toml");
    fs::write(&path, text).unwrap();
    path
}

fn read_tree(root: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                out.push((
                    path.strip_prefix(root).unwrap().to_path_buf(),
                    fs::read(&path).unwrap(),
                ));
            }
        }
    }
    out.sort();
    out
}

#[test]
fn unknown_subcommand_fails() {
    let out = rucb(&["frobnicate"], None);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("frobnicate"));
}

#[test]
fn missing_config_fails_with_path() {
    let out = rucb(&["simulate", "--config", "/nonexistent/cfg.toml"], None);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("/nonexistent/cfg.toml"));
}

#[test]
fn invalid_config_names_key() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "[plan.policy_config]\nbeta = 0.0\n[scripted]\nsize = 10\n",
    );
    let out = rucb(
        &["simulate", "--config", cfg.to_str().unwrap()],
        Some(tmp.path()),
    );
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("plan.policy_config.beta"));
}

#[test]
fn simulate_uses_env_output_root() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), SMALL);
    let root = tmp.path().join("env-root");
    let out = rucb(
        &[
            "simulate",
            "--config",
            cfg.to_str().unwrap(),
            "--policy",
            "ucb",
            "--seed",
            "7",
        ],
        Some(&root),
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(root.join("runs/ucb/seed-7/log.jsonl").is_file());
    assert!(root.join("summary.json").is_file());
}

#[test]
fn compare_then_report_is_bit_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), SMALL);
    let root = tmp.path().join("out");
    let out = rucb(
        &[
            "compare",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            root.to_str().unwrap(),
        ],
        None,
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );

    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(root.join("summary.json")).unwrap()).unwrap();
    let policies = summary["policies"].as_array().unwrap();
    let keys: Vec<&str> = policies
        .iter()
        .map(|p| p["policy"].as_str().unwrap())
        .collect();
    assert_eq!(keys, ["uniform", "ohem", "ucb", "rucb"]);
    for p in policies {
        let share = p["mean_boot_corrupted_share"].as_f64().unwrap();
        assert!((0.0..=1.0).contains(&share));
        assert_eq!(p["runs"].as_array().unwrap().len(), 2);
    }

    let before = read_tree(&root);
    for f in [
        "summary.json",
        "policies.csv",
        "runs/ucb/seed-3/histogram.csv",
        "runs/rucb/seed-4/top_selected.csv",
    ] {
        fs::remove_file(root.join(f)).unwrap();
    }
    let out = rucb(&["report", "--out", root.to_str().unwrap()], None);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert_eq!(read_tree(&root), before);
}

#[test]
fn report_without_runs_fails() {
    let tmp = tempfile::tempdir().unwrap();
    let out = rucb(&["report", "--out", tmp.path().to_str().unwrap()], None);
    assert!(!out.status.success());
}
