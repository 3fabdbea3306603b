//! Behaviour of the check runner on convergence grids, repeated runs, varied
//! seeds and coarse grids, and its serialized results.

use looplab::suite::{
    convergence_study, parse_group, run_check, run_trial, CheckConfig, CheckResult, SuiteError, ToleranceClass,
};
use looplab::FdConfig;

fn quick(trials: usize) -> CheckConfig {
    CheckConfig { trials, ..CheckConfig::default() }
}

#[test]
fn finite_difference_checks_converge_at_second_order() {
    let cfg = quick(8);
    for name in ["C6", "C9", "C12"] {
        let study = convergence_study(name, &[(256, 1e-2), (256, 5e-3), (256, 2.5e-3)], &cfg).unwrap();
        for p in &study[1..] {
            let ratio = p.ratio.unwrap();
            assert!((3.5..=4.5).contains(&ratio), "{name}: ratio {ratio} at h = {}", p.h);
        }
    }
}

#[test]
fn quadrature_checks_are_flat_in_n() {
    let cfg = CheckConfig { modes: 8, ..quick(8) };
    let study = convergence_study("C4", &[(64, 1e-3), (128, 1e-3), (256, 1e-3)], &cfg).unwrap();
    assert!(study.iter().all(|p| p.max_rel_residual <= 1e-11), "{study:?}");
    let study = convergence_study("C3", &[(64, 1e-3), (128, 1e-3), (256, 1e-3)], &quick(8)).unwrap();
    let first = study[0].max_rel_residual;
    assert!(study.iter().all(|p| p.max_rel_residual <= 10.0 * first.max(1e-13)), "{study:?}");
}

#[test]
fn runs_are_deterministic() {
    let cfg = quick(6);
    for name in ["C5a", "C8", "C12"] {
        let a = run_check(name, &cfg).unwrap();
        let b = run_check(name, &cfg).unwrap();
        assert_eq!(a.max_rel_residual.to_bits(), b.max_rel_residual.to_bits(), "{name}");
    }
    let t1 = run_trial("C7", &cfg, 3).unwrap().unwrap();
    let t2 = run_trial("C7", &cfg, 3).unwrap().unwrap();
    assert_eq!(t1.lhs, t2.lhs);
    assert_eq!(t1.rhs, t2.rhs);
}

#[test]
fn pass_pattern_is_seed_independent() {
    let cheap = ["C1", "C2", "C3", "C4", "C5a", "C5b", "C6", "C7", "C8", "C11", "C12", "C13"];
    for seed in [1u64, 99, 123_456_789] {
        let cfg = CheckConfig { seed, ..quick(4) };
        for name in cheap {
            let r = run_check(name, &cfg).unwrap();
            assert!(r.pass, "{name} fails at seed {seed}: {:e}", r.max_rel_residual);
        }
    }
}

#[test]
fn pass_is_residual_within_tolerance() {
    let r = run_check("C2", &quick(4)).unwrap();
    assert_eq!(r.pass, r.max_rel_residual <= r.tolerance);
    assert_eq!(r.tolerance, ToleranceClass::Quad.tolerance());
    assert_eq!(r.trials, 4);
    assert_eq!(r.skipped, 0);
}

#[test]
fn coarse_grids_are_flagged_under_resolved() {
    let cfg = CheckConfig { samples: 32, modes: 4, ..quick(2) };
    assert!(run_check("C6", &cfg).unwrap().under_resolved);
    assert!(!run_check("C4", &cfg).unwrap().under_resolved);
    assert!(!run_check("C6", &quick(2)).unwrap().under_resolved);
}

#[test]
fn invalid_configurations_are_rejected() {
    let odd = CheckConfig { samples: 31, ..quick(1) };
    assert!(matches!(run_check("C2", &odd), Err(SuiteError::InvalidConfig(_))));
    let step = CheckConfig { fd: FdConfig { h: 0.5, richardson: true }, ..quick(1) };
    assert!(matches!(run_check("C2", &step), Err(SuiteError::InvalidConfig(_))));
    assert!(matches!(run_check("C0", &quick(1)), Err(SuiteError::UnknownCheck(_))));
}

#[test]
fn results_round_trip_through_json() {
    let mut results: Vec<CheckResult> = ["C1", "C17"].iter().map(|n| run_check(n, &quick(2)).unwrap()).collect();
    results.push(run_check("C15", &CheckConfig { samples: 64, steps: 16, ..quick(1) }).unwrap());
    for r in &results {
        let text = serde_json::to_string(r).unwrap();
        let back: CheckResult = serde_json::from_str(&text).unwrap();
        assert_eq!(&back, r);
        assert!(text.contains("\"group\":\"su2\""));
    }
}

#[test]
fn group_labels_parse() {
    assert_eq!(parse_group("su2").unwrap(), 2);
    assert_eq!(parse_group("su(3)").unwrap(), 3);
    assert!(parse_group("so3").is_err());
    assert!(parse_group("su1").is_err());
}

#[test]
fn su3_runs_pointwise_checks() {
    let cfg = CheckConfig { n: 3, ..quick(4) };
    for name in ["C1", "C2", "C3", "C5a", "C13"] {
        let r = run_check(name, &cfg).unwrap();
        assert!(r.pass, "{name} on su3: {:e}", r.max_rel_residual);
    }
}
