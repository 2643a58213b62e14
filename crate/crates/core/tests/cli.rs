use std::fs;
use std::path::Path;

use chefs_hat::cli::run;

fn chefs_hat(args: &[&str]) -> i32 {
    run(std::iter::once("chefs-hat").chain(args.iter().copied()))
}

fn out(dir: &Path) -> &str {
    dir.to_str().unwrap()
}

#[test]
fn zero_games_is_a_clean_run() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(chefs_hat(&["simulate", "--games", "0", "--out", out(tmp.path())]), 0);
    let csv = fs::read_to_string(tmp.path().join("games.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1);
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["games"], 0);
}

#[test]
fn simulate_writes_every_output_and_replays() {
    let tmp = tempfile::tempdir().unwrap();
    let args = ["simulate", "--games", "3", "--seed", "12", "--agents", "r,f,r,f", "--out", out(tmp.path())];
    assert_eq!(chefs_hat(&args), 0);
    for file in ["config.toml", "log.jsonl", "games.csv", "summary.json"] {
        assert!(tmp.path().join(file).is_file(), "{file}");
    }
    let log = tmp.path().join("log.jsonl");
    assert_eq!(chefs_hat(&["replay", "--log", log.to_str().unwrap()]), 0);
    assert_eq!(chefs_hat(&["stats", "--in", out(tmp.path())]), 0);

    let text = fs::read_to_string(&log).unwrap();
    let tampered = text.replacen("\"valid\":false", "\"valid\":true", 1);
    assert_ne!(text, tampered);
    fs::write(&log, tampered).unwrap();
    assert_eq!(chefs_hat(&["replay", "--log", log.to_str().unwrap()]), 3);
}

#[test]
fn echoed_config_reproduces_the_run() {
    let first = tempfile::tempdir().unwrap();
    let second = tempfile::tempdir().unwrap();
    assert_eq!(chefs_hat(&["simulate", "--games", "2", "--seed", "5", "--variant", "no-joker", "--out", out(first.path())]), 0);
    let config = first.path().join("config.toml");
    assert_eq!(chefs_hat(&["simulate", "--config", config.to_str().unwrap(), "--out", out(second.path())]), 0);
    assert_eq!(
        fs::read(first.path().join("log.jsonl")).unwrap(),
        fs::read(second.path().join("log.jsonl")).unwrap()
    );
}

#[test]
fn experiment_one_table_has_a_row_per_variant() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(chefs_hat(&["exp1", "--games", "4", "--workers", "2", "--out", out(tmp.path())]), 0);
    let csv = fs::read_to_string(tmp.path().join("exp1.csv")).unwrap();
    assert_eq!(csv.lines().count(), 5);
    for variant in ["all", "no-joker", "no-exchange", "no-special"] {
        assert!(csv.lines().any(|l| l.starts_with(&format!("{variant},4,"))), "{csv}");
    }
}

#[test]
fn train_then_eval_from_the_checkpoint() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(chefs_hat(&["train", "--games", "2", "--out", out(tmp.path())]), 0);
    let checkpoint = fs::read_dir(tmp.path())
        .unwrap()
        .map(|e| e.unwrap().path())
        .find(|p| p.extension().is_some_and(|e| e == "chqn"))
        .expect("checkpoint written");
    let eval = tempfile::tempdir().unwrap();
    let args = ["eval", "--games", "2", "--checkpoint", checkpoint.to_str().unwrap(), "--out", out(eval.path())];
    assert_eq!(chefs_hat(&args), 0);
}

#[test]
fn bad_inputs_map_to_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(chefs_hat(&["simulate", "--agents", "alien,r,r,r", "--out", out(tmp.path())]), 2);
    assert_eq!(chefs_hat(&["simulate", "--games", "1", "--agents", "r,r", "--out", out(tmp.path())]), 2);
    assert_eq!(chefs_hat(&["simulate", "--reward", "nonsense", "--out", out(tmp.path())]), 2);

    let junk = tmp.path().join("junk.chqn");
    fs::write(&junk, b"not a checkpoint").unwrap();
    assert_eq!(chefs_hat(&["eval", "--checkpoint", junk.to_str().unwrap(), "--out", out(tmp.path())]), 3);
    let missing = tmp.path().join("missing.jsonl");
    assert_eq!(chefs_hat(&["replay", "--log", missing.to_str().unwrap()]), 3);

    let config = tmp.path().join("bad.toml");
    fs::write(&config, "seed = 1\nturbo = true\n").unwrap();
    assert_eq!(chefs_hat(&["simulate", "--config", config.to_str().unwrap(), "--out", out(tmp.path())]), 2);
}
