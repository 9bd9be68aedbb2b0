//! Multi-thread rayon pool against a one-thread pool on the same workloads.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use hillriesz::floquet::Floquet;
use hillriesz::potential::fixtures;
use hillriesz::resolvent::riesz_projection_with;
use hillriesz::rootbasis::build_system;
use hillriesz::spectra::{build_catalog_with, Boundary, SpectraOptions};
use hillriesz::C64;

fn pools() -> Vec<(String, rayon::ThreadPool)> {
    let n = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1).max(2);
    [1, n]
        .into_iter()
        .map(|t| (format!("{t}_threads"), rayon::ThreadPoolBuilder::new().num_threads(t).build().unwrap()))
        .collect()
}

fn catalog(c: &mut Criterion) {
    let v = fixtures::complex_pair();
    let fl = Floquet::new(&v, 513).unwrap();
    let opts = SpectraOptions { grid_points: 513, ..SpectraOptions::default() };
    let mut g = c.benchmark_group("catalog_k12");
    g.sample_size(10);
    for (name, pool) in pools() {
        g.bench_function(BenchmarkId::from_parameter(&name), |b| {
            b.iter(|| pool.install(|| build_catalog_with(&fl, &v, 12, Boundary::Periodic, &opts).unwrap()))
        });
    }
    g.finish();
}

fn projection(c: &mut Criterion) {
    let v = fixtures::mathieu();
    let fl = Floquet::new(&v, 129).unwrap();
    let mut g = c.benchmark_group("projection_g129");
    g.sample_size(10);
    for (name, pool) in pools() {
        g.bench_function(BenchmarkId::from_parameter(&name), |b| {
            b.iter(|| pool.install(|| riesz_projection_with(&fl, 0.0, black_box(C64::new(-0.4551386, 0.0)), 0.5, 64).unwrap()))
        });
    }
    g.finish();
}

fn root_system(c: &mut Criterion) {
    let v = fixtures::gasymov();
    let fl = Floquet::new(&v, 513).unwrap();
    let opts = SpectraOptions { grid_points: 513, ..SpectraOptions::default() };
    let cat = build_catalog_with(&fl, &v, 10, Boundary::Periodic, &opts).unwrap();
    let mut g = c.benchmark_group("root_system_k10");
    g.sample_size(10);
    for (name, pool) in pools() {
        g.bench_function(BenchmarkId::from_parameter(&name), |b| b.iter(|| pool.install(|| build_system(&fl, &cat, 10).unwrap())));
    }
    g.finish();
}

criterion_group!(benches, catalog, projection, root_system);
criterion_main!(benches);
