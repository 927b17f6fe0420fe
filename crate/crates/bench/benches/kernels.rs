use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use krein_bench::{hermitian, pencil};
use krein_core::linalg::hermitian_eigen;
use krein_core::uncertainty::RelationId;
use krein_core::{decompose_spectral, run_sweep, solve_pencil, GramForm, SweepConfig};

fn eigen(c: &mut Criterion) {
    let mut group = c.benchmark_group("hermitian_eigen");
    for n in [8, 32, 64] {
        let m = hermitian(n);
        group.bench_with_input(BenchmarkId::from_parameter(n), &m, |b, m| b.iter(|| hermitian_eigen(black_box(m)).unwrap()));
    }
    group.finish();
}

fn decomposition(c: &mut Criterion) {
    let mut group = c.benchmark_group("decompose_spectral");
    for n in [4, 16, 32] {
        let form = GramForm::new(pencil(n).1).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &form, |b, f| b.iter(|| decompose_spectral(black_box(f)).unwrap()));
    }
    group.finish();
}

fn pencils(c: &mut Criterion) {
    let mut group = c.benchmark_group("solve_pencil");
    for n in [2, 4, 8] {
        let (a, bm) = pencil(n);
        group.bench_function(BenchmarkId::from_parameter(n), |b| b.iter(|| solve_pencil(black_box(&a), black_box(&bm), 1e-10).unwrap()));
    }
    group.finish();
}

fn sweeps(c: &mut Criterion) {
    let mut group = c.benchmark_group("sweep");
    group.sample_size(10);
    for relation in [RelationId::SchrodingerKrein, RelationId::AjThm72] {
        let config = SweepConfig::new(relation, 4, 1000, 42).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(relation), &config, |b, cfg| b.iter(|| run_sweep(black_box(cfg)).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, eigen, decomposition, pencils, sweeps);
criterion_main!(benches);
