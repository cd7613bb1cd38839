//! End-to-end runs of the `symbandit` binary.

use std::path::PathBuf;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_symbandit")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn value_of(text: &str, key: &str) -> String {
    let prefix = format!("{key} = ");
    text.lines().find_map(|l| l.strip_prefix(&prefix)).unwrap_or_else(|| panic!("{key} missing in\n{text}")).to_string()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("symbandit-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn one_round_values() {
    let out = run(&["dp", "--T", "1", "--eps", "0.3"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(value_of(&text, "v"), "0.545");
    assert_eq!(value_of(&text, "v_bar"), "0.3");
    assert!(text.starts_with("# symbandit "));
    assert!(text.contains("\"seed\":0"));
}

#[test]
fn gamma_sets_the_gap() {
    let text = stdout(&run(&["dp", "--T", "100", "--gamma", "1"]));
    assert_eq!(value_of(&text, "eps"), "0.1");
}

#[test]
fn prefactor_maximizer_rounds() {
    let out = run(&["prefactor", "--which", "c", "--paper"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let row = text.lines().last().unwrap();
    assert_eq!(row.split('\t').collect::<Vec<_>>(), ["c", "0.707", "0.572", "true"]);
}

#[test]
fn figure_has_five_hundred_rows() {
    let path = scratch("figure.csv");
    let out = run(&["figure", "--grid", "0.01:5:0.01", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    assert_eq!(reader.headers().unwrap(), vec!["gamma", "c", "c_bar", "c_max", "c_bar_max"]);
    let rows: Vec<_> = reader.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 500);
    assert_eq!(rows.iter().filter(|r| &r[3] == "true").count(), 1);
    assert_eq!(rows.iter().filter(|r| &r[4] == "true").count(), 1);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(run(&["dp", "--T", "10"]).status.code(), Some(2));
    assert_eq!(run(&["dp", "--T", "10", "--eps", "0.1", "--gamma", "1"]).status.code(), Some(2));
    assert_eq!(run(&["nonsense"]).status.code(), Some(2));
}

#[test]
fn violated_invariants_exit_one_with_a_name() {
    let out = run(&["dp", "--T", "10", "--eps", "1.5"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("eps"), "{err}");
    let out = run(&["dp", "--T", "0", "--eps", "0.1"]);
    assert_eq!(out.status.code(), Some(1));
    let out = run(&["figure", "--grid", "0:6:0.1"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn json_embeds_version_and_config() {
    let text = stdout(&run(&["dp", "--T", "4", "--eps", "0.2", "--format", "json", "--seed", "9"]));
    let doc: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(doc["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(doc["config"]["seed"], 9);
    assert_eq!(doc["rows"][0]["horizon"], 4);
}

#[test]
fn sweep_from_toml_is_reproducible() {
    let config = scratch("sweep.toml");
    std::fs::write(&config, "regime = \"medium\"\nhorizons = [16, 64]\nbranch = \"c0\"\nreplications = 500\nseed = 3\n\n[gap]\ngamma = 1.5\n").unwrap();
    let a = scratch("a.csv");
    let b = scratch("b.csv");
    for out in [&a, &b] {
        let status = run(&["sweep", "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()]).status;
        assert!(status.success());
    }
    let first = std::fs::read(&a).unwrap();
    assert!(!first.is_empty());
    let text = String::from_utf8(first.clone()).unwrap();
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 3);
    // The --out path is part of the embedded config; compare the data rows.
    let strip = |bytes: &[u8]| String::from_utf8(bytes.to_vec()).unwrap().lines().filter(|l| !l.starts_with("# config")).collect::<Vec<_>>().join("\n");
    assert_eq!(strip(&first), strip(&std::fs::read(&b).unwrap()));
}

#[test]
fn sweep_rejects_unknown_keys() {
    let config = scratch("bad.toml");
    std::fs::write(&config, "regime = \"small\"\nhorizons = [10]\nbranch = \"c1\"\ncolour = 3\n\n[gap]\npower = 0.5\n").unwrap();
    let out = run(&["sweep", "--config", config.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn simulation_ignores_worker_count() {
    let base = ["simulate", "--T", "50", "--eps", "0.2", "--episodes", "40000", "--seed", "11"];
    let one = stdout(&run(&[&base[..], &["--workers", "1"]].concat()));
    let four = stdout(&run(&[&base[..], &["--workers", "4"]].concat()));
    let strip = |s: &str| s.lines().filter(|l| !l.starts_with("# config")).map(str::to_string).collect::<Vec<_>>();
    assert_eq!(strip(&one), strip(&four));
}

#[test]
fn verify_passes() {
    let out = run(&["verify"]);
    assert!(out.status.success(), "{}", stdout(&out));
}
