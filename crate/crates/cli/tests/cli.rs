use std::path::Path;
use std::process::{Command, Output};

use simgate_core::config::ExperimentConfig;
use simgate_core::results::read_results;

fn simgate(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_simgate"))
        .args(args)
        .env_remove("SIMGATE_TIMESTAMP")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn ideal_gate_by_name() {
    let o = simgate(&["gate", "--config", "ideal_3x2x2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("fidelity: 1.000000000"), "{out}");
    assert!(out.contains("leakage: 0.000000000"), "{out}");
    assert!(out.contains("duration: 52 waits"), "{out}");
}

#[test]
fn bad_separation_fails_validation() {
    let o = simgate(&["validate", "--config", "bad_separation"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("violation"), "{}", stdout(&o));
}

#[test]
fn canonical_faithful_setup_validates() {
    let o = simgate(&["validate", "--config", "faithful_4x2x2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn seeded_runs_write_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("x.toml");
    std::fs::write(&cfg, "[setup]\nly = 2\nlz = 2\n[noise]\nloss_rate = 1e-3\n[run]\ntrajectories = 30\n").unwrap();
    let mut files = Vec::new();
    for name in ["a.csv", "b.csv"] {
        let out = dir.path().join(name);
        let o = simgate(&[
            "gate",
            "--config",
            cfg.to_str().unwrap(),
            "--seed",
            "7",
            "--output",
            out.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        files.push((std::fs::read(&out).unwrap(), std::fs::read(out.with_extension("jsonl")).unwrap()));
    }
    assert_eq!(files[0], files[1]);
    let recs = read_results(&dir.path().join("a.csv")).unwrap();
    assert_eq!(recs.len(), 1);
    assert_eq!(recs[0].seed, 7);
    assert_eq!(recs[0].trajectories, 30);
}

#[test]
fn malformed_config_exits_2_with_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "[setup]\nlx = 2\ncolour = \"red\"\n").unwrap();
    let o = simgate(&["gate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));

    std::fs::write(&cfg, "[run]\ntrajectories = 0\n").unwrap();
    let o = simgate(&["gate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 2"), "{}", stderr(&o));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(simgate(&["teleport"]).status.code(), Some(2));
    assert_eq!(simgate(&["gate", "--config", "no_such_config"]).status.code(), Some(2));
}

#[test]
fn printed_config_reparses() {
    let o = simgate(&["init", "--config", "faithful_4x2x2", "--print-config"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    let text: String = out.split("# config hash").next().unwrap().to_string();
    let printed = ExperimentConfig::parse(&text).unwrap();
    let original = ExperimentConfig::load(Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/faithful_4x2x2.toml"))).unwrap();
    assert_eq!(printed, original);
    assert!(out.contains("structures complete: true"), "{out}");
}

#[test]
fn noise_sweep_writes_one_record_per_point() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sweep.toml");
    std::fs::write(
        &cfg,
        "[run]\ntrajectories = 20\nseed = 3\n[sweep]\nparameter = \"p_hole\"\nvalues = [0.0, 0.05, 0.1]\n",
    )
    .unwrap();
    let out = dir.path().join("sweep.csv");
    let o = simgate(&["noise-sweep", "--config", cfg.to_str().unwrap(), "--output", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let recs = read_results(&out).unwrap();
    let mags: Vec<f64> = recs.iter().map(|r| r.noise_magnitude).collect();
    assert_eq!(mags, vec![0.0, 0.05, 0.1]);
    assert_eq!(recs[0].noise_kind, "none");
    assert!((recs[0].fidelity_mean - 1.0).abs() < 1e-9);
}

#[test]
fn scaling_and_oracle_subcommands() {
    let o = simgate(&["scaling", "--experiment", "duration_lx"]);
    assert_eq!(o.status.code(), Some(0), "{}{}", stdout(&o), stderr(&o));
    assert!(stdout(&o).contains("PASS"));
    let o = simgate(&["scaling", "--experiment", "nonsense"]);
    assert_eq!(o.status.code(), Some(2));
    let o = simgate(&["oracle-check", "--cases", "25", "--seed", "9"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("agree"));
}
