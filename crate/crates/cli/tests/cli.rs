use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn repar(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_repar"))
        .args(args)
        .env_remove("REPAR_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write(dir: &TempDir, name: &str, body: &str) -> String {
    let p = dir.path().join(name);
    fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

/// 20 copies of every point of GF(2)^3 labeled by the parity 101.
fn hidden_parity_file(dir: &TempDir) -> String {
    let mut body = String::from("#d=3\n");
    for _ in 0..20 {
        for v in 0..8u8 {
            let bits: Vec<u8> = (0..3).map(|i| (v >> i) & 1).collect();
            let y = (bits[0] + bits[2]) % 2;
            body += &format!("{}{}{},{y}\n", bits[0], bits[1], bits[2]);
        }
    }
    write(dir, "hidden.txt", &body)
}

#[test]
fn partition_of_repeated_pair() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "s.txt", "#d=2\n10\n01\n10\n01\n");
    let o = repar(&["partition", "--in", &input, "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["sets"].as_array().unwrap().len(), 2);
    assert_eq!(v["sets"][0]["indices"], serde_json::json!([0, 1]));
    assert_eq!(v["sets"][1]["indices"], serde_json::json!([2, 3]));
    assert_eq!(v["multiplicities"], serde_json::json!([[["10", "01"], 2]]));
}

#[test]
fn calc_params_values() {
    let o = repar(&["calc-params", "-d", "5", "-m", "10000", "--rho", "0.1", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let t_min = (2.0f64 * 10000.0 * (25.0 + (60.0f64).ln())).sqrt();
    let t_max = 30.0 * 5.0 / 0.1 * (10000.0 * (600.0f64).ln()).sqrt();
    assert!((v["t_min"].as_f64().unwrap() - t_min).abs() < 1e-9);
    assert!((v["t_max"].as_f64().unwrap() - t_max).abs() < 1e-6);
    assert_eq!(v["valid"], false);
    assert_eq!(v["limit"].as_f64().unwrap(), 400.0);
}

#[test]
fn learn_recovers_hidden_parity() {
    let dir = TempDir::new().unwrap();
    let input = hidden_parity_file(&dir);
    let o = repar(&["learn", "--in", &input, "--t-min", "10", "--t-max", "17", "--seed", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout(&o).lines().next(), Some("101"));
}

#[test]
fn seeded_runs_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let input = hidden_parity_file(&dir);
    for format in ["json", "csv", "text"] {
        let args = ["span", "--in", &input, "--t-min", "10", "--t-max", "17", "--seed", "99", "--format", format];
        let (a, b) = (repar(&args), repar(&args));
        assert_eq!(a.status.code(), Some(0));
        assert_eq!(a.stdout, b.stdout, "format {format}");
    }
    let bench = [
        "bench-replicability", "-d", "4", "--planted", "2", "-m", "400", "--trials", "8",
        "--scaled-thresholds", "0.25,0.5", "--seed", "11", "--format", "json",
    ];
    assert_eq!(repar(&bench).stdout, repar(&bench).stdout);
}

#[test]
fn seed_from_environment_matches_flag() {
    let dir = TempDir::new().unwrap();
    let input = hidden_parity_file(&dir);
    let args = ["span", "--in", &input, "--t-min", "10", "--t-max", "17", "--format", "json"];
    let flag = repar(&[&args[..], &["--seed", "42"]].concat());
    let env = Command::new(env!("CARGO_BIN_EXE_repar"))
        .args(args)
        .env("REPAR_SEED", "42")
        .output()
        .unwrap();
    assert_eq!(flag.stdout, env.stdout);
}

#[test]
fn out_flag_writes_file() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("report.json");
    let o = repar(&[
        "bench-sensitivity", "-d", "2", "-m", "3", "--claimed-bound", "2", "--format", "json", "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["passed"], true);
}

#[test]
fn failing_bench_exits_one() {
    // replacement sensitivity reaches 2 at d=2, m=4
    let o = repar(&["bench-sensitivity", "-d", "2", "-m", "4"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL"));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(repar(&["learn"]).status.code(), Some(2));
    assert_eq!(repar(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(repar(&["partition", "--in", "/nonexistent/file"]).status.code(), Some(2));
    let dir = TempDir::new().unwrap();
    let input = hidden_parity_file(&dir);
    // --wrap needs a batch size
    assert_eq!(repar(&["learn", "--in", &input, "--wrap"]).status.code(), Some(2));
    let bad = write(&dir, "bad.txt", "#d=3\n1010\n");
    assert_eq!(repar(&["partition", "--in", &bad]).status.code(), Some(2));
}

#[test]
fn config_file_drives_bench() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("from-config.txt");
    let config = write(
        &dir,
        "hh.toml",
        &format!(
            "seed = \"7\"\nout = {:?}\nbench = \"heavy-hitters\"\nfrequencies = [0.9]\nk = 1000\ntrials = 10\n",
            out.to_str().unwrap()
        ),
    );
    let o = repar(&["bench-hh", "--config", &config]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("bench heavy-hitters seed"), "{text}");
    // a config for another bench is rejected
    assert_eq!(repar(&["bench-coverage", "--config", &config]).status.code(), Some(2));
    assert!(Path::new(&out).exists());
}
