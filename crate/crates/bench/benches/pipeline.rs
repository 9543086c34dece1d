use criterion::{black_box, criterion_group, criterion_main, Criterion};

use contextsim::analysis::{analyze_experiment, fit_sinusoid};
use contextsim::apparatus::{
    default_chi_grid, run_experiment_set, simulate_scan, ApparatusConfig, ScanKind,
};
use contextsim::contexts::{peres_mermin_contexts, sequential_expectation};
use contextsim::hilbert::entangled_state;
use contextsim::nchv::{classical_bound, inequality3_expression};

fn bench_theory(c: &mut Criterion) {
    let expr = inequality3_expression();
    c.bench_function("classical_bound_64_assignments", |b| {
        b.iter(|| classical_bound(black_box(&expr)))
    });

    let contexts = peres_mermin_contexts();
    let psi = entangled_state();
    c.bench_function("sequential_expectation_triple", |b| {
        b.iter(|| sequential_expectation(black_box(&contexts[2]), black_box(&psi)).unwrap())
    });
}

fn bench_simulation(c: &mut Criterion) {
    let mut config = ApparatusConfig::calibrated();
    config.rng_seed = 1;
    let grid = default_chi_grid(16);
    c.bench_function("simulate_scan_16_points", |b| {
        b.iter(|| {
            simulate_scan(
                black_box(ScanKind::SpinPath { alpha: 0.0 }),
                black_box(&grid),
                black_box(&config),
                0,
            )
            .unwrap()
        })
    });

    let scan = simulate_scan(ScanKind::SpinPath { alpha: 0.0 }, &grid, &config, 0).unwrap();
    c.bench_function("fit_sinusoid_16_points", |b| {
        b.iter(|| fit_sinusoid(black_box(&scan)).unwrap())
    });
}

fn bench_full_pipeline(c: &mut Criterion) {
    let mut config = ApparatusConfig::calibrated();
    config.rng_seed = 2;
    c.bench_function("experiment_set_and_analysis_3_reps", |b| {
        b.iter(|| {
            let scans = run_experiment_set(black_box(&config), 3, 16).unwrap();
            analyze_experiment(&scans).unwrap()
        })
    });
}

criterion_group!(benches, bench_theory, bench_simulation, bench_full_pipeline);
criterion_main!(benches);
