//! Reference values produced by the standalone programs under `oracles/`.

use looplab::geometry::{beta_form, cocycle_omega, z_map};
use looplab::lie::{basic_level, basis, bracket, exp_map, pauli_basis, su2_integral_of_h};
use looplab::spectral::trapezoid;
use looplab::suite::RotationFixture;
use looplab::{DiscreteLoop, InnerProduct, TangentField};
use serde_json::Value;
use std::f64::consts::PI;

const CLOSED_FORMS: &str = include_str!("../fixtures/closed_forms.json");
const HOPF: &str = include_str!("../fixtures/hopf_normalization.json");

fn fixture(text: &str) -> Value {
    let v: Value = serde_json::from_str(text).expect("fixture parses");
    assert!(v["command"].as_str().is_some_and(|c| c.starts_with("python3 oracles/")));
    v
}

fn num(v: &Value) -> f64 {
    v.as_f64().expect("number")
}

#[test]
fn pauli_brackets_match_oracle() {
    let f = fixture(CLOSED_FORMS);
    let b = pauli_basis();
    for (key, (i, j)) in [("12", (0, 1)), ("13", (0, 2)), ("23", (1, 2))] {
        let got = bracket(&b[i], &b[j]);
        let want = &f["pauli_brackets"][key];
        for r in 0..2 {
            for c in 0..2 {
                let z = got.as_matrix()[(r, c)];
                assert!((z.re - num(&want[r][c][0])).abs() < 1e-15, "bracket {key} at ({r},{c})");
                assert!((z.im - num(&want[r][c][1])).abs() < 1e-15, "bracket {key} at ({r},{c})");
            }
        }
    }
    let ip = InnerProduct::default();
    for i in 0..3 {
        for j in 0..3 {
            assert!((ip.pair(&b[i], &b[j]) - num(&f["gram"][i][j])).abs() < 1e-15);
        }
    }
}

#[test]
fn pauli_basis_agrees_with_general_basis() {
    let b = pauli_basis();
    for (p, q) in b.iter().zip(basis(2).iter()) {
        assert!((p.as_matrix() - q.as_matrix()).norm() < 1e-15);
    }
}

fn torus_loop(n_samples: usize) -> DiscreteLoop {
    let s3 = pauli_basis()[2].clone();
    DiscreteLoop::new((0..n_samples).map(|j| exp_map(&s3.scale(2.0 * PI * j as f64 / n_samples as f64))).collect())
        .unwrap()
}

#[test]
fn loop_integrals_match_oracle() {
    let f = fixture(CLOSED_FORMS);
    let ip = InnerProduct::default();
    let [s1, _, s3] = pauli_basis();
    for n in [16, 64, 256] {
        let tau = torus_loop(n);
        let x = TangentField::constant(&s3, n);
        assert!((z_map(&ip, &tau, &x) - num(&f["loops"]["z_torus"])).abs() < 1e-10);
        let b = beta_form(&ip).eval(&vec![tau], &[&vec![x]]);
        assert!((b - num(&f["loops"]["beta_torus"])).abs() < 1e-10);
        let xs = TangentField::from_fn(n, |z| s1.scale((2.0 * PI * z).sin()));
        let yc = TangentField::from_fn(n, |z| s1.scale((2.0 * PI * z).cos()));
        assert!((cocycle_omega(&ip, &xs, &yc) - num(&f["loops"]["cocycle_sin_cos"])).abs() < 1e-10);
    }
}

#[test]
fn trapezoid_is_exact_on_band_limited_integrands() {
    let f = fixture(CLOSED_FORMS);
    for case in f["band_limited"].as_array().unwrap() {
        let k = case["modes"].as_u64().unwrap() as usize;
        let a: Vec<f64> = case["cos"].as_array().unwrap().iter().map(num).collect();
        let b: Vec<f64> = case["sin"].as_array().unwrap().iter().map(num).collect();
        let eval = |z: f64| {
            (0..=k)
                .map(|m| a[m] * (2.0 * PI * m as f64 * z).cos() + b[m] * (2.0 * PI * m as f64 * z).sin())
                .sum::<f64>()
        };
        for n in [4 * k, 8 * k, 4 * k + 2] {
            let v: Vec<f64> = (0..n).map(|j| eval(j as f64 / n as f64)).collect();
            assert!((trapezoid(&v) - num(&case["integral"])).abs() < 1e-12, "K = {k}, N = {n}");
        }
    }
}

#[test]
fn h_normalization_matches_oracle() {
    let f = fixture(HOPF);
    let integral = su2_integral_of_h(1.0);
    assert!((integral.abs() - num(&f["abs_integral_of_h"])).abs() < 1e-9 * integral.abs());
    assert!((num(&f["abs_integral_of_h"]) - num(&f["closed_form_8_pi_squared"])).abs() < 1e-9);
    assert!((basic_level().abs() - num(&f["basic_level"])).abs() < 1e-12);
    assert!((su2_integral_of_h(basic_level()) - 1.0).abs() < 1e-4);
}

#[test]
fn rotation_fixture_is_consistent() {
    let f = RotationFixture::load().unwrap();
    assert!(f.command.starts_with("python3 oracles/rotation_counterexample.py"));
    assert!(f.y > 0.0);
    assert_eq!(f.expected_integral(1.0, 1.0), 0.0);
    assert!((f.expected_integral(0.0, 2.0) - f.y).abs() < 1e-12);
}
