use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use spinsq::noise::{self, lyapunov};
use spinsq::studies::{self, OptimizerOptions, ValidationSetup};
use spinsq_bench::{effective_point, effective_system, omega_grid, three_level_system};

fn lyapunov_solvers(c: &mut Criterion) {
    let mut group = c.benchmark_group("lyapunov");
    for (name, sys) in [("5x5", effective_system()), ("10x10", three_level_system())] {
        let sys = sys.unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(name), &sys, |b, sys| {
            b.iter(|| lyapunov(black_box(&sys.drift), black_box(&sys.diffusion)).unwrap())
        });
    }
    group.finish();
}

fn spectra(c: &mut Criterion) {
    let sys = effective_system().unwrap();
    let grid = omega_grid(1000.0, 1001);
    c.bench_function("outgoing_spectrum_1001", |b| {
        b.iter(|| noise::outgoing_spectrum(black_box(&sys), &grid).unwrap())
    });
    c.bench_function("spectral_decomposition_201", |b| {
        let grid = omega_grid(500.0, 201);
        b.iter(|| noise::decompose(black_box(&sys), &grid).unwrap())
    });
}

fn steady_states(c: &mut Criterion) {
    let setup = ValidationSetup::open();
    c.bench_function("three_level_steady_state", |b| {
        b.iter(|| setup.three_level(black_box(5.0), black_box(6.5)).unwrap())
    });
}

fn optimizer(c: &mut Criterion) {
    let base = effective_point();
    let opts = OptimizerOptions {
        delta_c_step: 0.1,
        i2_points: 41,
        ..OptimizerOptions::default()
    };
    let mut group = c.benchmark_group("optimize");
    group.sample_size(10);
    group.bench_function("delta_bar_10", |b| {
        b.iter(|| studies::optimize_with(black_box(&base), &opts).unwrap())
    });
    group.finish();
}

criterion_group!(benches, lyapunov_solvers, spectra, steady_states, optimizer);
criterion_main!(benches);
