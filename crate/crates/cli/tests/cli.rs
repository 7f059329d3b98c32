use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_chainlens"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("chainlens-cli-{name}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stage(name: &str, config: &Path) -> Output {
    run(&[name, "--config", config.to_str().unwrap()])
}

fn generate_small(dir: &Path) -> PathBuf {
    let out = run(&[
        "generate",
        "--out-dir",
        dir.to_str().unwrap(),
        "--per-class",
        "6",
        "--seed",
        "3",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let cfg = dir.join("pipeline.toml");
    // keep the run short
    let mut text = std::fs::read_to_string(&cfg).unwrap();
    text = text
        .replace("epochs = 30", "epochs = 2")
        .replace("epochs = 60", "epochs = 2");
    std::fs::write(&cfg, text).unwrap();
    cfg
}

#[test]
fn full_run_writes_metrics() {
    let dir = scratch("full");
    let cfg = generate_small(&dir);
    let out = stage("all", &cfg);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let metrics = std::fs::read_to_string(dir.join("work/metrics.json")).unwrap();
    for key in [
        "\"precision\"",
        "\"recall\"",
        "\"f1\"",
        "\"weighted_avg\"",
        "\"confusion\"",
    ] {
        assert!(metrics.contains(key), "{key}");
    }
    assert!(dir.join("work/digests.json").is_file());
}

#[test]
fn predict_before_training_is_a_dependency_error() {
    let dir = scratch("dep");
    let cfg = generate_small(&dir);
    let out = stage("predict", &cfg);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("train-cls"));
}

#[test]
fn bad_config_and_usage_exit_two() {
    let dir = scratch("cfg");
    let cfg = dir.join("bad.toml");
    std::fs::write(
        &cfg,
        "transactions = \"a\"\nlabels = \"b\"\nwork_dir = \"w\"\npsi = 2.0\n",
    )
    .unwrap();
    assert_eq!(stage("ingest", &cfg).status.code(), Some(2));
    assert_eq!(
        stage("ingest", &dir.join("missing.toml")).status.code(),
        Some(2)
    );
    assert_eq!(run(&["no-such-stage"]).status.code(), Some(2));
}

#[test]
fn unreadable_input_exits_three() {
    let dir = scratch("input");
    let cfg = dir.join("p.toml");
    std::fs::write(
        &cfg,
        "transactions = \"nope.jsonl\"\nlabels = \"nope.jsonl\"\nwork_dir = \"w\"\n",
    )
    .unwrap();
    assert_eq!(stage("ingest", &cfg).status.code(), Some(3));
    std::fs::write(dir.join("nope.jsonl"), "{not json\n").unwrap();
    assert_eq!(stage("ingest", &cfg).status.code(), Some(3));
}

#[test]
fn seed_override_changes_split() {
    let dir = scratch("seed");
    let cfg = generate_small(&dir);
    let c = cfg.to_str().unwrap();
    assert!(run(&["ingest", "--config", c, "--seed", "1"])
        .status
        .success());
    let a = std::fs::read(dir.join("work/ingest.json")).unwrap();
    assert!(run(&["ingest", "--config", c, "--seed", "1"])
        .status
        .success());
    assert_eq!(a, std::fs::read(dir.join("work/ingest.json")).unwrap());
    assert!(run(&["ingest", "--config", c, "--seed", "2"])
        .status
        .success());
    assert_ne!(a, std::fs::read(dir.join("work/ingest.json")).unwrap());
}
