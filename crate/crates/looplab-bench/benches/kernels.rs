use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use looplab::geometry::{
    cocycle_omega, pt_integrand, xi_form, ConnectionPreset, PTConfig, PairFamily, TrivialConnection,
};
use looplab::lie::{exp_map, log_map};
use looplab::loops::{reparam_family, rotation_family, WarpSchedule};
use looplab::suite::{run_trial, CheckConfig};
use looplab::InnerProduct;
use looplab_bench::{fields, group_samples, loops};
use std::hint::black_box;

fn lie_kernels(c: &mut Criterion) {
    let mut group = c.benchmark_group("lie");
    for n in [2, 3] {
        let (g, x) = group_samples(n, 64, 1);
        group.bench_with_input(BenchmarkId::new("exp", n), &x, |b, x| {
            b.iter(|| x.iter().map(|v| exp_map(black_box(v))).collect::<Vec<_>>())
        });
        group.bench_with_input(BenchmarkId::new("log", n), &g, |b, g| {
            b.iter(|| g.iter().map(|u| log_map(black_box(u))).collect::<Vec<_>>())
        });
    }
    group.finish();
}

fn loop_kernels(c: &mut Criterion) {
    let ip = InnerProduct::default();
    let mut group = c.benchmark_group("loops");
    for n_samples in [64, 256] {
        let f = fields(2, n_samples, 3);
        group.bench_with_input(BenchmarkId::new("cocycle", n_samples), &f, |b, f| {
            b.iter(|| cocycle_omega(&ip, &f[0], &f[1]))
        });
        let l = loops(1, n_samples, 5);
        let warp = WarpSchedule::Sinusoidal { amplitude: 0.3, mode: 1 };
        group.bench_with_input(BenchmarkId::new("reparam_family_s32", n_samples), &l, |b, l| {
            b.iter(|| reparam_family(&l[0], &warp, 32).unwrap())
        });
    }
    group.finish();
}

fn transport_kernels(c: &mut Criterion) {
    let ip = InnerProduct::default();
    let tc = TrivialConnection::new(ConnectionPreset::Scaled(0.7));
    let l = loops(3, 128, 7);
    let fam: Vec<_> = l.iter().map(|x| rotation_family(x, 32).unwrap()).collect();
    let pair = PairFamily::new(fam[0].clone(), fam[1].clone(), fam[2].clone()).unwrap();
    c.bench_function("pt_integrand_rotation_n128_s32", |b| {
        b.iter(|| pt_integrand(&tc, &ip, PTConfig { x: 1.0 }, &pair).unwrap())
    });
    let xi = xi_form(&tc, &ip);
    let v = fields(3, 128, 9);
    c.bench_function("xi_form_n128", |b| b.iter(|| xi.eval(&l, &[&v])));
}

fn check_trials(c: &mut Criterion) {
    let cfg = CheckConfig::default();
    let mut group = c.benchmark_group("trial");
    group.sample_size(10);
    for name in ["C2", "C6", "C10", "C14"] {
        group.bench_function(name, |b| b.iter(|| run_trial(name, &cfg, 0).unwrap().unwrap()));
    }
    group.finish();
}

criterion_group!(benches, lie_kernels, loop_kernels, transport_kernels, check_trials);
criterion_main!(benches);
