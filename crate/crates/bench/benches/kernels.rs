use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use foldnoise::fpt::{solve_b, LinearBoundary};
use foldnoise::{airy_eval, dv_integral, dv_limit, travel_time, travel_time_derivatives};

fn airy(c: &mut Criterion) {
    let mut g = c.benchmark_group("airy_eval");
    for z in [-20.0, -2.0, 0.5, 6.0, 40.0] {
        g.bench_with_input(BenchmarkId::from_parameter(z), &z, |b, &z| b.iter(|| airy_eval(black_box(z))));
    }
    g.finish();
}

fn flow(c: &mut Criterion) {
    c.bench_function("travel_time", |b| b.iter(|| travel_time(black_box(-5.0), black_box(-24.9), black_box(30.0))));
    c.bench_function("travel_time_derivatives", |b| {
        b.iter(|| travel_time_derivatives(black_box(-2.0), black_box(30.0)))
    });
}

fn dv(c: &mut Criterion) {
    c.bench_function("dv_limit", |b| b.iter(|| dv_limit(black_box(-25.0))));
    c.bench_function("dv_integral", |b| b.iter(|| dv_integral(black_box(-2.0), black_box(30.0))));
}

fn fpt(c: &mut Criterion) {
    let d = LinearBoundary::new(0.1).unwrap();
    let mut g = c.benchmark_group("solve_b");
    g.sample_size(10);
    for n in [100, 400] {
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| b.iter(|| solve_b(&d, 0.1, n)));
    }
    g.finish();
}

criterion_group!(benches, airy, flow, dv, fpt);
criterion_main!(benches);
