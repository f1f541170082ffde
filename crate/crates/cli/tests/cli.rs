use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn langlab(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_langlab"))
        .args(args)
        .current_dir(dir)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_slice(&fs::read(path).unwrap()).unwrap()
}

#[test]
fn help_lists_catalog_with_classes() {
    let dir = tempfile::tempdir().unwrap();
    let out = langlab(dir.path(), &["--help"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    for (id, class) in [
        ("dyck1", "counter"),
        ("shuffle2", "counter"),
        ("boolexp3", "counter"),
        ("reset_dyck1", "counter"),
        ("tomita5", "non-SF"),
        ("parity", "non-SF"),
        ("aa_star", "non-SF"),
        ("dn4", "SF, dot-depth 4"),
        ("zero12", "SF, dot-depth 2"),
    ] {
        let line = text
            .lines()
            .find(|l| l.split_whitespace().next() == Some(id))
            .unwrap_or_else(|| panic!("{id} missing from help"));
        assert!(line.contains(class), "{line}");
    }
}

#[test]
fn generate_unknown_language_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = langlab(dir.path(), &["generate", "nosuchlang"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("nosuchlang"));
}

#[test]
fn generate_dyck1_standard_sizes() {
    let dir = tempfile::tempdir().unwrap();
    let out = langlab(dir.path(), &["generate", "dyck1", "--seed", "7"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let m = read_json(&dir.path().join("data/dyck1/manifest.json"));
    assert_eq!(m["train_count"], 10000);
    let bins = m["bins"].as_array().unwrap();
    assert_eq!(bins.len(), 3);
    assert!(bins.iter().all(|b| b["count"] == 2000));
}

#[test]
fn generate_anbn_is_enumerated() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&langlab(dir.path(), &["generate", "anbn"])), 0);
    let train = fs::read_to_string(dir.path().join("data/anbn/train.jsonl")).unwrap();
    assert_eq!(train.lines().count(), 50);
}

#[test]
fn generate_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    for out in ["a", "b"] {
        let args = ["generate", "parity", "--train-size", "300", "--bin-size", "50", "--seed", "3", "--out", out];
        assert_eq!(code(&langlab(dir.path(), &args)), 0);
    }
    assert_eq!(
        read_json(&dir.path().join("a/manifest.json"))["sha256"],
        read_json(&dir.path().join("b/manifest.json"))["sha256"]
    );
}

#[test]
fn train_without_dataset_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&langlab(dir.path(), &["train", "--language", "dyck1"])), 2);
    assert_eq!(code(&langlab(dir.path(), &["grid", "--data", "missing"])), 2);
}

#[test]
fn config_rejects_unknown_keys_and_out_of_range_models() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("typo.toml"), "langauge = \"dyck1\"\n").unwrap();
    let out = langlab(dir.path(), &["generate", "dyck1", "--config", "typo.toml"]);
    assert_eq!(code(&out), 2);

    let gen = ["generate", "dyck1", "--train-size", "50", "--bin-size", "10"];
    assert_eq!(code(&langlab(dir.path(), &gen)), 0);
    fs::write(
        dir.path().join("big.toml"),
        "language = \"dyck1\"\n[model]\nkind = \"transformer\"\nd_model = 64\nheads = 4\nlayers = 1\npositional = \"masking\"\n",
    )
    .unwrap();
    assert_eq!(code(&langlab(dir.path(), &["train", "--config", "big.toml"])), 2);
    let fast_lr = ["train", "--language", "dyck1", "--lr", "0.5"];
    assert_eq!(code(&langlab(dir.path(), &fast_lr)), 2);
}

#[test]
fn train_then_viz_then_report() {
    let dir = tempfile::tempdir().unwrap();
    let gen = ["generate", "shuffle2", "--train-size", "200", "--bin-size", "40", "--seed", "1"];
    assert_eq!(code(&langlab(dir.path(), &gen)), 0);
    fs::write(
        dir.path().join("run.toml"),
        "language = \"shuffle2\"\nseed = 4\nout = \"results/s2\"\n[model]\nkind = \"transformer\"\nd_model = 8\nheads = 1\nlayers = 1\npositional = \"masking\"\n[train]\nlr = 0.01\nepochs = 2\n",
    )
    .unwrap();
    let out = langlab(dir.path(), &["train", "--config", "run.toml"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert!(text.contains("bin 0 [2, 50]"), "{text}");
    assert!(text.contains("bin 2 [102, 150]"), "{text}");
    let run = read_json(&dir.path().join("results/s2/run.json"));
    assert_eq!(run["epochs_run"], 2);
    assert_eq!(run["seed"], 4);

    let ckpt = "results/s2/model.ckpt.json";
    let out = langlab(dir.path(), &["viz", "--checkpoint", ckpt, "--language", "shuffle2", "--words", "30"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert!(text.contains("ratio 0") && text.contains("ratio 1"), "{text}");
    assert!(dir.path().join("viz/shuffle2/pearson.csv").exists());

    let wrong = langlab(dir.path(), &["viz", "--checkpoint", ckpt, "--language", "parity"]);
    assert_eq!(code(&wrong), 2);
    let missing = langlab(dir.path(), &["viz", "--checkpoint", "nope.json", "--language", "shuffle2"]);
    assert_eq!(code(&missing), 2);

    let out = langlab(dir.path(), &["report", "--results", "results", "--out", "tables"]);
    assert_eq!(code(&out), 0);
    let counter = fs::read_to_string(dir.path().join("tables/counter.csv")).unwrap();
    assert!(counter.lines().any(|l| l.starts_with("shuffle2,")), "{counter}");
}

#[test]
fn grid_respects_budget() {
    let dir = tempfile::tempdir().unwrap();
    let gen = ["generate", "tomita1", "--train-size", "20", "--bin-size", "20"];
    assert_eq!(code(&langlab(dir.path(), &gen)), 0);
    let out = langlab(
        dir.path(),
        &["grid", "--language", "tomita1", "--family", "lstm", "--budget", "3", "--epochs", "2", "--seed", "5"],
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let grid = read_json(&dir.path().join("results/tomita1/grid-lstm/grid.json"));
    assert_eq!(grid["runs"].as_array().unwrap().len(), 3);
    assert_eq!(grid["space_size"], 20);
}

fn exhaustive_counts(text: &str) -> Vec<u64> {
    text.lines()
        .filter_map(|l| l.split("exhaustive ").nth(1))
        .map(|rest| rest.split(|c: char| !c.is_ascii_digit()).next().unwrap().parse().unwrap())
        .collect()
}

#[test]
fn verify_defaults_pass() {
    let dir = tempfile::tempdir().unwrap();
    let out = langlab(dir.path(), &["verify", "--out", "verify.json"]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    let text = stdout(&out);
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS")).count(), 11, "{text}");
    let reports = read_json(&dir.path().join("verify.json"));
    assert_eq!(reports.as_array().unwrap().len(), 11);
}

#[test]
fn verify_max_len_shrinks_exhaustive_counts() {
    let dir = tempfile::tempdir().unwrap();
    let small = ["verify", "--max-len", "4", "--samples", "100", "--models", "3"];
    let large = ["verify", "--max-len", "6", "--samples", "100", "--models", "3"];
    let a = exhaustive_counts(&stdout(&langlab(dir.path(), &small)));
    let b = exhaustive_counts(&stdout(&langlab(dir.path(), &large)));
    assert_eq!(a.len(), b.len());
    assert!(a.iter().zip(&b).all(|(x, y)| x <= y));
    assert!(a.iter().zip(&b).any(|(x, y)| x < y));
}

#[test]
fn corrupted_embedding_fails_shuffle1() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["verify", "--max-len", "6", "--samples", "100", "--models", "3", "--corrupt-embedding"];
    let out = langlab(dir.path(), &args);
    assert_eq!(code(&out), 1);
    let text = stdout(&out);
    assert!(text.lines().any(|l| l.starts_with("FAIL") && l.contains("shuffle1")), "{text}");
}
