//! Benchmarks for the hot paths of `sampledyn-core`.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use sampledyn_core::extensions::ContractingState;
use sampledyn_core::{
    contracting_response_vector, estimate_basins, find_stationary, integrate, simulate_population,
    BasinOptions, ContractingGame, CoordinationGame, Environment, Response, SampleSizeDistribution, State,
    TieRule,
};

fn theta(pairs: &[(u32, f64)]) -> SampleSizeDistribution {
    SampleSizeDistribution::new(pairs.iter().copied()).unwrap()
}

/// Three interior stationary states; one large sample size.
fn mixed_env() -> Environment {
    let t = theta(&[(3, 0.5), (1000, 0.5)]);
    Environment::new(CoordinationGame::new(20.0, 0.05).unwrap(), t.clone(), t)
}

/// One stable interior state.
fn small_env() -> Environment {
    let t = theta(&[(1, 0.5), (5, 0.5)]);
    Environment::new(CoordinationGame::new(5.0, 0.2).unwrap(), t.clone(), t)
}

fn responses(c: &mut Criterion) {
    let w = mixed_env().response(1);
    c.bench_function("response value, k up to 1000", |b| {
        b.iter(|| w.value(black_box(0.37)))
    });
    c.bench_function("response derivative, k up to 1000", |b| {
        b.iter(|| w.derivative(black_box(0.37)))
    });
}

fn stationary(c: &mut Criterion) {
    let d = mixed_env().two_population();
    c.bench_function("two-population stationary states", |b| {
        b.iter(|| find_stationary(black_box(&d)))
    });
}

fn flow(c: &mut Criterion) {
    let env = small_env();
    c.bench_function("trajectory to t = 50", |b| {
        b.iter(|| integrate(black_box(&env), State::Two(0.2, 0.7), 50.0, 0.01).unwrap())
    });
    let mut g = c.benchmark_group("basins");
    g.sample_size(10);
    g.bench_function("21 x 21 grid", |b| {
        b.iter(|| estimate_basins(&env, 21, BasinOptions::default()).unwrap())
    });
    g.finish();
}

fn extensions(c: &mut Criterion) {
    let g = ContractingGame::new(vec![4.0, 2.0, 1.0], vec![1.0, 2.0, 4.0]).unwrap();
    let t = theta(&[(1, 0.4), (6, 0.6)]);
    let p = ContractingState::pure(1, 3).p2;
    let mixed = [0.3, 0.3, 0.4];
    c.bench_function("contracting response, exact enumeration", |b| {
        b.iter(|| contracting_response_vector(&g, 1, &t, black_box(&mixed), TieRule::Lowest, 0).unwrap())
    });
    c.bench_function("contracting response at a pure state", |b| {
        b.iter(|| contracting_response_vector(&g, 1, &t, black_box(&p), TieRule::Lowest, 0).unwrap())
    });
}

fn oracle(c: &mut Criterion) {
    let env = small_env();
    let mut g = c.benchmark_group("oracle");
    g.sample_size(10);
    g.bench_function("10^4 agents to t = 10", |b| {
        b.iter(|| simulate_population(&env, State::Two(0.2, 0.7), 10_000, 10.0, 0.01, 7).unwrap())
    });
    g.finish();
}

criterion_group!(benches, responses, stationary, flow, extensions, oracle);
criterion_main!(benches);
