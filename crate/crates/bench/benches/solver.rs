use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use riskaverse::catalog;
use riskaverse::dist::convolve_power;
use riskaverse::equilibrium::mixed_equilibria_2p;
use riskaverse::simulate::{compare_equilibria, SimConfig};
use riskaverse::{build_tensor, prob_max_all, Concept, MixedProfile};

fn kernels(c: &mut Criterion) {
    let g = catalog::example1().unwrap();
    let family = [g.payoff(0, &[0, 0]).clone(), g.payoff(0, &[1, 0]).clone()];
    c.bench_function("prob_max/two_bumps", |b| b.iter(|| prob_max_all(black_box(&family)).unwrap()));
    c.bench_function("build_tensor/example1", |b| b.iter(|| build_tensor(black_box(&g)).unwrap()));

    let t = build_tensor(&catalog::example2().unwrap()).unwrap();
    c.bench_function("mixed_equilibria/example2", |b| b.iter(|| mixed_equilibria_2p(black_box(&t), Concept::Rae).unwrap()));

    let d = g.payoff(0, &[0, 0]).clone();
    let step = d.narrowest_window().unwrap() / 64.0;
    c.bench_function("convolve_power/m16", |b| b.iter(|| convolve_power(black_box(&d), 16, step).unwrap()));
}

fn simulation(c: &mut Criterion) {
    let g = catalog::example4(5.0).unwrap();
    let a = MixedProfile::pure(g.shape(), &[0, 1]);
    let p = MixedProfile::pure(g.shape(), &[1, 1]);
    let cfg = SimConfig::new(100_000, 1, 0);
    c.bench_function("simulate/compare_1e5", |b| b.iter(|| compare_equilibria(&g, &a, &p, black_box(&cfg)).unwrap()));
}

criterion_group!(benches, kernels, simulation);
criterion_main!(benches);
