use std::path::Path;
use std::process::{Command, Output};

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_levy-clt")).args(args).current_dir(dir).output().unwrap()
}

fn code(dir: &Path, args: &[&str]) -> i32 {
    run(dir, args).status.code().unwrap()
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    assert_eq!(code(p, &["sweep", "--seed", "1", "--grid-count", "0"]), 2);
    assert_eq!(code(p, &["sweep", "--seed", "1", "--beta", "1", "--mode", "fixed", "--mc-size", "1000"]), 3);
    assert_eq!(code(p, &["demo-circle", "--seed", "1", "--circle-dim", "1"]), 2);
    assert_eq!(code(p, &["asmussen", "--seed", "1", "--g", "sin"]), 2);
    assert_eq!(code(p, &["scaling", "--config", "missing.toml"]), 4);
    assert_eq!(code(p, &["no-such-command"]), 2);
    std::fs::write(p.join("bad.toml"), "[triplet]\nbetta = 2.0\n").unwrap();
    assert_eq!(code(p, &["scaling", "--config", "bad.toml"]), 2);
}

#[test]
fn scaling_writes_outputs_and_resolved_config() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    std::fs::write(p.join("run.toml"), "seed = 5\n[triplet]\nbeta = 3.0\ndim = 2\n[scaling]\ntimes = [1.0, 100.0]\n").unwrap();
    assert_eq!(code(p, &["scaling", "--config", "run.toml", "--out", "out/s"]), 0);
    let csv = std::fs::read_to_string(p.join("out/s.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
    let cfg: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(p.join("out/s.config.json")).unwrap()).unwrap();
    assert_eq!(cfg["seed"], 5);
    assert_eq!(cfg["triplet"]["dim"], 2);
    assert_eq!(code(p, &["scaling", "--config", "out/s.config.json", "--out", "out/t"]), 0);
    assert_eq!(csv, std::fs::read_to_string(p.join("out/t.csv")).unwrap());
}

#[test]
fn generated_seed_is_echoed() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["scaling", "--times", "10"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("(generated)"));
}

#[test]
fn extract_seq_reads_csv() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let mut text = String::from("t,g\n");
    for k in 1..=10_000 {
        let t = (k as f64 * 1e-3).exp();
        text.push_str(&format!("{t},{}\n", 1.0 / t));
    }
    std::fs::write(p.join("g.csv"), text).unwrap();
    assert_eq!(code(p, &["extract-seq", "--seed", "1", "--input", "g.csv", "--out", "seq"]), 0);
    let json = std::fs::read_to_string(p.join("seq.json")).unwrap();
    assert!(json.contains("points"));
}
