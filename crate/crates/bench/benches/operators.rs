//! Benchmarks for the hot paths: unitary FFTs, the look-formation operator
//! pair, group thresholding, and full solver iterations.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use mlcs_bench::fixture;
use mlcs_core::fft::{fft_azimuth, FftDirection};
use mlcs_core::grid::LookStack;
use mlcs_core::mlrda::{look_form, look_inverse};
use mlcs_core::solver::{estimate_step, group_threshold, reconstruct, SensingOperator, SolverConfig};
use mlcs_core::{ComplexGrid, Seed};

fn bench_fft(c: &mut Criterion) {
    let mut group = c.benchmark_group("fft_azimuth");
    for n in [64usize, 128, 256] {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let grid = ComplexGrid::random(n, n, &mut rng);
        group.bench_with_input(BenchmarkId::from_parameter(n), &grid, |b, g| {
            b.iter(|| fft_azimuth(g, FftDirection::Forward))
        });
    }
    group.finish();
}

fn bench_look_operators(c: &mut Criterion) {
    let mut group = c.benchmark_group("look_operators");
    for (n, looks) in [(64usize, 1usize), (64, 4), (128, 4)] {
        let fx = fixture(n, looks, 1.0);
        let stack = look_form(&fx.raw, &fx.filters, &fx.plan).expect("look_form");
        let label = format!("{n}x{n}_L{looks}");
        group.bench_with_input(BenchmarkId::new("form", &label), &fx, |b, fx| {
            b.iter(|| look_form(&fx.raw, &fx.filters, &fx.plan).unwrap())
        });
        group.bench_with_input(
            BenchmarkId::new("inverse", &label),
            &(&fx, &stack),
            |b, (fx, stack)| b.iter(|| look_inverse(stack, &fx.filters, &fx.plan).unwrap()),
        );
    }
    group.finish();
}

fn bench_group_threshold(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let stack = LookStack::new(
        (0..4).map(|_| ComplexGrid::random(32, 128, &mut rng)).collect(),
    )
    .expect("stack");
    c.bench_function("group_threshold_128x128_L4", |b| {
        b.iter(|| group_threshold(&stack, 0.1))
    });
}

fn bench_solver(c: &mut Criterion) {
    let mut group = c.benchmark_group("solver");
    group.sample_size(10);
    let fx = fixture(64, 2, 0.3);
    group.bench_function("estimate_step_64x64_L2", |b| {
        b.iter(|| {
            let op = SensingOperator::new(&fx.filters, &fx.plan, &fx.data.mask, (64, 64)).unwrap();
            estimate_step(&op, Seed(11), 20)
        })
    });
    group.bench_function("reconstruct_20_iters_64x64_L2", |b| {
        b.iter(|| {
            let mut config = SolverConfig::new(0.05, 2, Seed(12));
            config.max_iterations = 20;
            config.rel_change_tol = 0.0;
            reconstruct(&fx.data, &fx.filters, &fx.plan, &config).unwrap()
        })
    });
    group.finish();
}

criterion_group!(
    benches,
    bench_fft,
    bench_look_operators,
    bench_group_threshold,
    bench_solver
);
criterion_main!(benches);
