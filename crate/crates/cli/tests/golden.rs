//! Regression against committed gate schedules and reports.
//!
//! `SIMGATE_BLESS=1 cargo test --test golden` rewrites the fixtures.

use std::path::PathBuf;

use simgate_core::choreography::{build_setup, SetupSpec};
use simgate_core::collective::{effective_gate, CollectiveMode, GateReport, ModeProfile};
use simgate_core::primitives::CollisionParams;
use simgate_core::schedule::{ExecOptions, ProtocolSchedule};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

fn check(lx: i32, ly: i32, lz: i32) {
    let (s, setup) = build_setup(&SetupSpec::ideal(lx, ly, lz)).unwrap();
    let p = CollisionParams::ideal();
    let schedule = setup.gate_schedule(&p);
    let mode = CollectiveMode::from_profile(&ModeProfile::default(), &setup.storage, &s).unwrap();
    let report = effective_gate(&s, &mode, &schedule, &p, &ExecOptions::default()).unwrap();
    let stem = format!("{lx}x{ly}x{lz}");
    let sched_path = fixture(&format!("{stem}.schedule"));
    let report_path = fixture(&format!("{stem}.report.json"));
    if std::env::var("SIMGATE_BLESS").is_ok_and(|v| v == "1") {
        std::fs::create_dir_all(fixture("")).unwrap();
        std::fs::write(&sched_path, schedule.to_string()).unwrap();
        std::fs::write(&report_path, serde_json::to_string_pretty(&report).unwrap() + "\n").unwrap();
    }

    let text = std::fs::read_to_string(&sched_path).unwrap();
    assert_eq!(schedule.to_string(), text, "{stem}: schedule text changed");
    let parsed: ProtocolSchedule = text.parse().unwrap();
    assert_eq!(parsed.len(), schedule.len());
    assert_eq!(parsed.waits(), schedule.waits());

    let golden: GateReport = serde_json::from_str(&std::fs::read_to_string(&report_path).unwrap()).unwrap();
    for m in 0..3 {
        for n in 0..3 {
            assert!((golden.g[m][n] - report.g[m][n]).norm() < 1e-9, "{stem}: g[{m}][{n}]");
        }
    }
    assert!((golden.fidelity - report.fidelity).abs() < 1e-9);
    assert!((golden.leakage - report.leakage).abs() < 1e-9);
    assert_eq!(golden.duration_waits, report.duration_waits);
    assert!((golden.duration_time - report.duration_time).abs() < 1e-9);
}

#[test]
fn golden_2x1x1() {
    check(2, 1, 1);
}

#[test]
fn golden_2x2x2() {
    check(2, 2, 2);
}

#[test]
fn golden_3x2x2() {
    check(3, 2, 2);
}
