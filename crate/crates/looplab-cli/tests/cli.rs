//! End-to-end behaviour of the `verify` binary and the report formats.

use clap::Parser;
use looplab::suite::{run_check, CheckConfig};
use looplab_cli::{parse_report, to_json, to_markdown, Cli, Report};
use std::process::Command;

fn verify(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_verify")).args(args).output().expect("binary runs");
    (out.status.code().unwrap_or(-1), String::from_utf8(out.stdout).unwrap(), String::from_utf8(out.stderr).unwrap())
}

fn temp_path(name: &str) -> std::path::PathBuf {
    std::env::temp_dir().join(format!("looplab-cli-{}-{name}", std::process::id()))
}

#[test]
fn odd_sample_count_is_a_usage_error() {
    let (code, stdout, stderr) = verify(&["--samples", "31"]);
    assert_eq!(code, 2);
    assert!(stdout.is_empty());
    assert!(stderr.contains("even"));
}

#[test]
fn bad_flags_and_names_are_usage_errors() {
    assert_eq!(verify(&["--no-such-flag"]).0, 2);
    assert_eq!(verify(&["--check", "C42"]).0, 2);
    assert_eq!(verify(&["--connection", "curved"]).0, 2);
    assert_eq!(verify(&["--fd-step", "0.5"]).0, 2);
    assert_eq!(verify(&["--all", "--check", "C1"]).0, 2);
}

#[test]
fn single_check_writes_single_entry_report() {
    let path = temp_path("c8.json");
    let (code, _, _) = verify(&["--check", "C8", "--samples", "512", "--trials", "4", "-o", path.to_str().unwrap()]);
    assert_eq!(code, 0);
    let text = std::fs::read_to_string(&path).unwrap();
    std::fs::remove_file(&path).ok();
    assert!(text.ends_with('\n'));
    let report = parse_report(&text).unwrap();
    assert_eq!(report.results.len(), 1);
    assert_eq!(report.results[0].name, "C8");
    assert_eq!(report.config.samples, 512);
    assert_eq!(report.results[0].config.samples, 512);
}

#[test]
fn failing_check_exits_with_one() {
    // A coarse step makes the finite-difference check miss its tolerance.
    let (code, stdout, _) = verify(&["--check", "C6", "--fd-step", "0.1", "--trials", "2"]);
    assert_eq!(code, 1);
    let report = parse_report(&stdout).unwrap();
    assert!(!report.results[0].pass);
}

#[test]
fn repeated_checks_keep_registry_order() {
    let (code, stdout, _) = verify(&["--check", "C4", "--check", "c2", "--trials", "2"]);
    assert_eq!(code, 0);
    let names: Vec<String> = parse_report(&stdout).unwrap().results.into_iter().map(|r| r.name).collect();
    assert_eq!(names, ["C2", "C4"]);
}

#[test]
fn markdown_lists_each_check_with_its_identity() {
    let (code, stdout, _) = verify(&["--check", "C2", "--check", "C5a", "--report", "md", "--trials", "2"]);
    assert_eq!(code, 0);
    for name in ["C2", "C5a"] {
        let spec = looplab::suite::spec(name).unwrap();
        let row = stdout.lines().find(|l| l.starts_with(&format!("| {name} |"))).expect("row per check");
        assert!(row.contains(&spec.anchor.replace('|', "\\|")));
        assert!(row.ends_with("PASS |"));
    }
}

#[test]
fn convergence_study_reports_ratios() {
    let (code, stdout, _) = verify(&["--convergence", "C6", "--trials", "2"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(v["check"], "C6");
    assert_eq!(v["config"]["fd"]["richardson"], false);
    let ratio = v["points"][2]["ratio"].as_f64().unwrap();
    assert!((3.5..=4.5).contains(&ratio));
}

#[test]
fn report_round_trips() {
    let cfg = CheckConfig { trials: 2, ..CheckConfig::default() };
    let results = ["C1", "C13", "C17"].iter().map(|n| run_check(n, &cfg).unwrap()).collect();
    let report = Report::new(cfg.clone(), results);
    assert_eq!(parse_report(&to_json(&report)).unwrap(), report);
    let empty = Report::new(cfg, vec![]);
    let text = to_json(&empty);
    assert!(text.contains("\"results\": []"));
    assert_eq!(parse_report(&text).unwrap(), empty);
    assert!(to_markdown(&empty).contains("0 of 0 checks pass"));
}

#[test]
fn defaults_match_suite_defaults() {
    let cli = Cli::try_parse_from(["verify"]).unwrap();
    assert_eq!(cli.config().unwrap(), CheckConfig::default());
    assert_eq!(cli.selected_checks().unwrap().len(), looplab::suite::registry().len());
}
