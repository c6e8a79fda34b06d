use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use ellipsoid_lab::harness::{run_scan, run_sweep, DEFAULT_TOL};
use ellipsoid_lab::qmat::hermitian_eig;
use ellipsoid_lab::states::{max_obese, sample_random};
use ellipsoid_lab::steering::ellipsoid_of;
use ellipsoid_lab::{full_report, EnsembleKind, EnsembleSpec, Rank};

fn kernels(c: &mut Criterion) {
    let spec = EnsembleSpec::new(EnsembleKind::GinibreMixed, Rank::Fixed(4), 1, 1);
    let rho = sample_random(&spec, 0).unwrap().state;

    c.bench_function("hermitian_eig_4x4", |b| b.iter(|| hermitian_eig(black_box(rho.matrix()))));
    c.bench_function("sample_random", |b| b.iter(|| sample_random(black_box(&spec), 0)));
    c.bench_function("ellipsoid_of", |b| b.iter(|| ellipsoid_of(black_box(&rho))));
    c.bench_function("full_report", |b| b.iter(|| full_report(black_box(&rho))));
    let obese = max_obese(0.4).unwrap();
    c.bench_function("full_report_obese", |b| b.iter(|| full_report(black_box(&obese))));
}

fn pipelines(c: &mut Criterion) {
    let mut group = c.benchmark_group("pipelines");
    group.sample_size(10);
    let spec = EnsembleSpec::new(EnsembleKind::GinibreMixed, Rank::Mixed, 42, 1_000);
    group.bench_function("scan_1k", |b| b.iter(|| run_scan(black_box(&spec), DEFAULT_TOL)));
    group.bench_function("sweep_101", |b| b.iter(|| run_sweep(101, DEFAULT_TOL)));
    group.finish();
}

criterion_group!(benches, kernels, pipelines);
criterion_main!(benches);
