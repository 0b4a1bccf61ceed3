use std::path::PathBuf;
use std::process::Command;

use serde_json::Value;
use sft_cli::{emit_report, run_command, Format, Report};

fn input(name: &str) -> String {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../inputs");
    root.join(format!("{name}.json")).to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> (i32, String) {
    run_command(std::iter::once("sftmix").chain(args.iter().copied()))
}

fn report(args: &[&str]) -> Report {
    let (code, out) = run(args);
    assert_eq!(code, 0, "{out}");
    serde_json::from_str(&out).unwrap()
}

fn statuses(r: &Report) -> Vec<(String, String)> {
    r.verdicts.iter().map(|v| (v.property.name().to_string(), v.status.name().to_string())).collect()
}

#[test]
fn golden_mean_mixing_is_proved() {
    let r = report(&["mixing", "--input", &input("golden_mean")]);
    assert_eq!(r.schema, sft_cli::SCHEMA);
    assert_eq!(statuses(&r), vec![("mixing".into(), "proved".into())]);
}

#[test]
fn simplified_golden_mean_strong_specification_at_width_three() {
    let r = report(&["strongspec", "--input", &input("simplified_golden_mean"), "--k", "3"]);
    let v = &r.verdicts[0];
    assert_eq!(v.status.name(), "proved");
    let cert = serde_json::to_value(&v.certificate).unwrap();
    assert_eq!((cert["k"].as_u64(), cert["m"].as_u64(), cert["n"].as_u64()), (Some(3), Some(3), Some(3)));
}

#[test]
fn boyle_hole_filling_fails_with_replayable_witness() {
    let (code, out) = run(&["hfc", "--input", &input("boyle"), "--m", "1", "--n", "1"]);
    assert_eq!(code, 0);
    let r: Report = serde_json::from_str(&out).unwrap();
    let data = r.data.as_ref().unwrap();
    assert_eq!(data["holds"], Value::Bool(false));
    assert!(data["witness"]["annulus"].as_array().is_some_and(|a| !a.is_empty()));
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("hfc.json");
    std::fs::write(&path, &out).unwrap();
    let replayed = report(&["certify", "--input", &input("boyle"), "--replay", path.to_str().unwrap()]);
    let d = replayed.data.unwrap();
    assert_eq!(d["reproduced"], Value::Bool(true));
    assert_eq!(d["replay"][0]["replayed"], Value::String("refuted".into()));
}

#[test]
fn golden_mean_full_report_has_five_verdicts() {
    let r = report(&["report", "--input", &input("golden_mean")]);
    let got = statuses(&r);
    let props: Vec<&str> = got.iter().map(|(p, _)| p.as_str()).collect();
    assert_eq!(props, ["primitivity-all-n", "primitivity-all-n", "mixing", "block-gluing", "strong-specification"]);
    let dirs: Vec<_> = r.verdicts.iter().map(|v| v.direction).collect();
    assert_eq!(dirs[..2], [Some(sft_core::Direction::Horizontal), Some(sft_core::Direction::Vertical)]);
    let st: Vec<&str> = got.iter().map(|(_, s)| s.as_str()).collect();
    assert_eq!(st, ["proved", "proved", "proved", "evidence", "proved"]);
}

#[test]
fn reports_are_byte_stable_across_runs_and_threads() {
    for name in ["golden_mean", "three_coloring", "boyle", "six_vertex"] {
        let path = input(name);
        let (_, a) = run(&["report", "--input", &path]);
        let (_, b) = run(&["report", "--input", &path, "--threads", "1"]);
        let (_, c) = run(&["report", "--input", &path, "--threads", "3"]);
        assert_eq!(a, b, "{name}");
        assert_eq!(a, c, "{name}");
    }
}

#[test]
fn certificates_round_trip_through_replay() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["golden_mean", "cycle_and_pair", "three_coloring", "burton_steif", "hole_filling_33", "two_constants", "eight_vertex"] {
        let (code, out) = run(&["report", "--input", &input(name)]);
        assert_eq!(code, 0);
        let original: Report = serde_json::from_str(&out).unwrap();
        let path = dir.path().join(format!("{name}.json"));
        std::fs::write(&path, &out).unwrap();
        let replayed = report(&["certify", "--input", &input(name), "--replay", path.to_str().unwrap()]);
        assert_eq!(statuses(&replayed), statuses(&original), "{name}");
        assert_eq!(replayed.data.unwrap()["reproduced"], Value::Bool(true), "{name}");
    }
}

#[test]
fn tampered_certificate_is_rejected() {
    let (_, out) = run(&["mixing", "--input", &input("golden_mean")]);
    let mut doc: Value = serde_json::from_str(&out).unwrap();
    doc["verdicts"][0]["theorem"] = Value::String("non-degenerate/primitive-all-n".into());
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, doc.to_string()).unwrap();
    let r = report(&["certify", "--input", &input("golden_mean"), "--replay", path.to_str().unwrap()]);
    assert_eq!(r.verdicts[0].status.name(), "unknown");
    assert_eq!(r.data.unwrap()["reproduced"], Value::Bool(false));
}

#[test]
fn replay_against_another_set_is_a_format_error() {
    let (_, out) = run(&["mixing", "--input", &input("golden_mean")]);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("gm.json");
    std::fs::write(&path, out).unwrap();
    let (code, _) = run(&["certify", "--input", &input("boyle"), "--replay", path.to_str().unwrap()]);
    assert_eq!(code, 1);
}

#[test]
fn empty_verdict_list() {
    let v: Value = serde_json::from_str(&emit_report(&[], Format::Json)).unwrap();
    assert_eq!(v, serde_json::json!({ "verdicts": [] }));
}

#[test]
fn unknown_status_still_exits_zero() {
    let r = report(&["mixing", "--input", &input("diagonal_order")]);
    assert_eq!(r.verdicts[0].status.name(), "unknown");
}

#[test]
fn usage_and_format_errors_exit_one() {
    assert_eq!(run(&["mixing", "--bogus"]).0, 1);
    assert_eq!(run(&["frobnicate"]).0, 1);
    assert_eq!(run(&["mixing"]).0, 1);
    assert_eq!(run(&["mixing", "--input", "/nonexistent.json"]).0, 1);
    assert_eq!(run(&["mixing", "--example", "no-such-set"]).0, 1);
    let dir = tempfile::tempdir().unwrap();
    for (i, text) in ["{", r#"{"p":2,"mode":"vertex","allowed":[[0,0,0,2]]}"#, r#"{"p":2,"mode":"vertex"}"#].iter().enumerate() {
        let path = dir.path().join(format!("bad{i}.json"));
        std::fs::write(&path, text).unwrap();
        assert_eq!(run(&["inspect", "--input", path.to_str().unwrap()]).0, 1, "{text}");
    }
    assert_eq!(run(&["edge", "--input", &input("golden_mean")]).0, 1);
}

#[test]
fn resource_caps_exit_two() {
    assert_eq!(run(&["hfc", "--input", &input("golden_mean"), "--m", "13", "--n", "2"]).0, 2);
    assert_eq!(run(&["primitivity", "--input", &input("golden_mean"), "--n", "40"]).0, 2);
}

#[test]
fn edge_subcommand_reports_six_vertex_mixing() {
    let r = report(&["edge", "--input", &input("six_vertex")]);
    assert_eq!(r.verdicts[0].status.name(), "proved");
    let data = r.data.unwrap();
    assert_eq!(data["H"]["parts"].as_array().unwrap().len(), 4);
}

#[test]
fn oracle_crosscheck_and_annulus_fill() {
    let r = report(&["oracle", "--input", &input("golden_mean"), "--seed", "7"]);
    assert_eq!(r.data.unwrap()["passed"], Value::Bool(true));
    let r = report(&["oracle", "--input", &input("boyle"), "--k", "2", "--m", "1", "--n", "1"]);
    assert_eq!(r.data.unwrap()["holds"], Value::Bool(false));
}

#[test]
fn text_format_and_examples() {
    let (code, out) = run(&["report", "--example", "golden-mean", "--format", "text"]);
    assert_eq!(code, 0);
    assert!(out.contains("mixing: proved"), "{out}");
    assert!(out.contains("strong-specification: proved"), "{out}");
    let r = report(&["inspect", "--example", "three-coloring"]);
    assert_eq!(r.data.unwrap()["h2"].as_array().unwrap().len(), 9);
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_sftmix");
    let ok = Command::new(bin).args(["mixing", "--input", &input("golden_mean")]).output().unwrap();
    assert_eq!(ok.status.code(), Some(0));
    let doc: Value = serde_json::from_slice(&ok.stdout).unwrap();
    assert_eq!(doc["verdicts"][0]["status"], Value::String("proved".into()));
    let bad = Command::new(bin).args(["mixing"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(1));
    assert!(!bad.stderr.is_empty());
}
