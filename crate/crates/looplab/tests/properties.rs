//! Structural invariants of the Lie-algebra kernel, the form calculus and the
//! loop-space operations, checked on seeded random inputs.

use looplab::forms::{exterior_derivative, exterior_derivative_terms, pullback, transgress};
use looplab::geometry::{cs_form, rho_form, wz_form, ConnectionPreset, TrivialConnection};
use looplab::lie::{adjoint, exp_map, log_map, random_algebra, random_group};
use looplab::loops::{random_field, random_loop};
use looplab::suite::relative_residual;
use looplab::{AlgebraVector, FdConfig, GroupMap, GroupPoint, InnerProduct, TangentField};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn finite_tangents(r: &mut ChaCha8Rng, n: usize, comps: usize, count: usize) -> Vec<Vec<AlgebraVector>> {
    (0..count).map(|_| (0..comps).map(|_| random_algebra(r, n, 1.0)).collect()).collect()
}

fn refs<T>(v: &[T]) -> Vec<&T> {
    v.iter().collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pairing_is_ad_invariant(seed in any::<u64>(), n in 2usize..4) {
        let mut r = rng(seed);
        let g = random_group(&mut r, n, 3.0);
        let (x, y) = (random_algebra(&mut r, n, 1.0), random_algebra(&mut r, n, 1.0));
        let ip = InnerProduct::new(1.7);
        let lhs = ip.pair(&adjoint(&g, &x), &adjoint(&g, &y));
        let rhs = ip.pair(&x, &y);
        prop_assert!((lhs - rhs).abs() < 1e-12 * (1.0 + x.norm() * y.norm()));
    }

    #[test]
    fn finite_forms_are_alternating(seed in any::<u64>()) {
        let mut r = rng(seed);
        let ip = InnerProduct::default();
        let h = wz_form(&ip, 2);
        let p1 = vec![random_group(&mut r, 2, 2.0)];
        let v = finite_tangents(&mut r, 2, 1, 3);
        let a = h.eval(&p1, &[&v[0], &v[1], &v[2]]);
        prop_assert!((a + h.eval(&p1, &[&v[1], &v[0], &v[2]])).abs() < 1e-12 * (1.0 + a.abs()));
        prop_assert!((a + h.eval(&p1, &[&v[0], &v[2], &v[1]])).abs() < 1e-12 * (1.0 + a.abs()));

        let rho = rho_form(&ip, 2);
        let p2 = vec![random_group(&mut r, 2, 2.0), random_group(&mut r, 2, 2.0)];
        let w = finite_tangents(&mut r, 2, 2, 2);
        let b = rho.eval(&p2, &[&w[0], &w[1]]);
        prop_assert!((b + rho.eval(&p2, &[&w[1], &w[0]])).abs() < 1e-12 * (1.0 + b.abs()));
        prop_assert!(rho.eval(&p2, &[&w[0], &w[0]]).abs() < 1e-12);

        let cs = cs_form(&TrivialConnection::new(ConnectionPreset::Scaled(0.7)), &ip, 2);
        let u = finite_tangents(&mut r, 2, 2, 3);
        let c = cs.eval(&p2, &[&u[0], &u[1], &u[2]]);
        prop_assert!((c + cs.eval(&p2, &[&u[2], &u[1], &u[0]])).abs() < 1e-12 * (1.0 + c.abs()));
    }
}

#[test]
fn exp_log_round_trip() {
    let mut r = rng(11);
    for i in 0..1000 {
        let n = if i % 2 == 0 { 2 } else { 3 };
        let x = random_algebra(&mut r, n, 1.0);
        // Frobenius norm below 3 keeps every eigenvalue inside (−π, π).
        let x = x.scale(r.random::<f64>() * 3.0 / x.norm());
        let back = log_map(&exp_map(&x)).expect("inside the principal branch");
        assert!((back.as_matrix() - x.as_matrix()).norm() < 1e-10, "sample {i}: n = {n}");
        let g = random_group(&mut r, n, 3.0);
        let again = exp_map(&log_map(&g).unwrap());
        assert!(again.distance(&g) < 1e-10, "sample {i}: n = {n}");
    }
}

#[test]
fn transgression_commutes_with_pullback() {
    let ip = InnerProduct::default();
    let h = wz_form(&ip, 2);
    let lhs_form = transgress(&pullback(&h, &GroupMap::mult()).unwrap()).unwrap();
    let rhs_form = pullback(&transgress(&h).unwrap(), &GroupMap::mult()).unwrap();
    for seed in 0..8u64 {
        let p = vec![random_loop(2, 64, 2 * seed, 3, 0.5).unwrap(), random_loop(2, 64, 2 * seed + 1, 3, 0.5).unwrap()];
        let v: Vec<Vec<TangentField>> =
            (0..2).map(|k| (0..2).map(|c| random_field(2, 64, 100 + 4 * seed + 2 * k + c, 3, 1.0)).collect()).collect();
        let a = lhs_form.eval(&p, &[&v[0], &v[1]]);
        let b = rhs_form.eval(&p, &[&v[0], &v[1]]);
        assert!((a - b).abs() < 1e-11 * (1.0 + a.abs()), "seed {seed}: {a} vs {b}");
    }
}

#[test]
fn exterior_derivative_anticommutes_with_transgression() {
    let ip = InnerProduct::default();
    let fd = FdConfig::default();
    let rho = rho_form(&ip, 2);
    let d_of_t = transgress(&rho).unwrap();
    let t_of_d = transgress(&exterior_derivative(&rho, fd).unwrap()).unwrap();
    for seed in 0..4u64 {
        let p = vec![random_loop(2, 64, 10 + seed, 3, 0.5).unwrap(), random_loop(2, 64, 20 + seed, 3, 0.5).unwrap()];
        let v: Vec<Vec<TangentField>> =
            (0..2).map(|k| (0..2).map(|c| random_field(2, 64, 200 + 4 * seed + 2 * k + c, 3, 1.0)).collect()).collect();
        let lhs = exterior_derivative_terms(&d_of_t, fd, &p, &refs(&v));
        let rhs = -t_of_d.eval(&p, &[&v[0], &v[1]]);
        let rel = relative_residual(&lhs, &[rhs], &[]);
        assert!(rel < 1e-6, "seed {seed}: relative residual {rel:e}");
    }
}

#[test]
fn second_exterior_derivative_vanishes() {
    let ip = InnerProduct::default();
    let fd = FdConfig::default();
    let rho = rho_form(&ip, 2);
    let d_rho = exterior_derivative(&rho, fd).unwrap();
    let mut r = rng(5);
    for trial in 0..8 {
        let p: Vec<GroupPoint> = vec![random_group(&mut r, 2, 2.0), random_group(&mut r, 2, 2.0)];
        let v = finite_tangents(&mut r, 2, 2, 4);
        let outer = exterior_derivative_terms(&d_rho, fd, &p, &refs(&v));
        let scale: Vec<f64> = (0..4)
            .map(|i| {
                let rest: Vec<&Vec<AlgebraVector>> = (0..4).filter(|&k| k != i).map(|k| &v[k]).collect();
                d_rho.eval(&p, &rest)
            })
            .collect();
        let rel = relative_residual(&outer, &[], &scale);
        assert!(rel < 1e-4, "trial {trial}: relative residual {rel:e}");
    }
}

#[test]
fn central_differences_are_second_order() {
    // dρ has the exact value pr₁*H + pr₂*H − m*H, so the error is pure truncation.
    let ip = InnerProduct::default();
    let h = wz_form(&ip, 2);
    let rho = rho_form(&ip, 2);
    let target = pullback(&h, &GroupMap::pr1())
        .unwrap()
        .combine(1.0, &pullback(&h, &GroupMap::pr2()).unwrap(), 1.0)
        .unwrap()
        .combine(1.0, &pullback(&h, &GroupMap::mult()).unwrap(), -1.0)
        .unwrap();
    let mut r = rng(9);
    for trial in 0..8 {
        let p: Vec<GroupPoint> = vec![random_group(&mut r, 2, 2.0), random_group(&mut r, 2, 2.0)];
        let v = finite_tangents(&mut r, 2, 2, 3);
        let exact = target.eval(&p, &refs(&v));
        let err = |h: f64| {
            let fd = FdConfig { h, richardson: false };
            (exterior_derivative_terms(&rho, fd, &p, &refs(&v)).iter().sum::<f64>() - exact).abs()
        };
        let ratio = err(2e-2) / err(1e-2);
        assert!((3.5..=4.5).contains(&ratio), "trial {trial}: ratio {ratio}");
        let fd = FdConfig { h: 2e-2, richardson: true };
        let extrapolated = (exterior_derivative_terms(&rho, fd, &p, &refs(&v)).iter().sum::<f64>() - exact).abs();
        assert!(extrapolated < err(1e-2) / 10.0, "trial {trial}: extrapolation did not help");
    }
}
