use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use qheat_bench::reference_table;
use qheat_core::heat::{finite_time_pdf, longtime_cumulants};
use qheat_core::mc::sample_heat;

fn bench_finite_time_pdf(c: &mut Criterion) {
    let (table, init) = reference_table(3);
    let t = 80.0 * table.tau();
    let mut group = c.benchmark_group("finite_time_pdf");
    for grid in [256usize, 512, 2048] {
        group.bench_function(BenchmarkId::new("grid", grid), |b| {
            b.iter(|| finite_time_pdf(black_box(&table), &init, t, grid).unwrap());
        });
    }
    group.finish();
}

fn bench_longtime_cumulants(c: &mut Criterion) {
    let (table, _) = reference_table(3);
    let t = 700.0 * table.tau();
    c.bench_function("longtime_cumulants", |b| {
        b.iter(|| longtime_cumulants(black_box(&table), t, 3).unwrap());
    });
}

fn bench_sample_heat(c: &mut Criterion) {
    let (table, init) = reference_table(3);
    let t = 80.0 * table.tau();
    let mut group = c.benchmark_group("sample_heat");
    group.sample_size(20);
    for n_traj in [1_000usize, 10_000] {
        group.bench_function(BenchmarkId::new("trajectories", n_traj), |b| {
            b.iter(|| sample_heat(black_box(&table), &init, t, n_traj, 42).unwrap());
        });
    }
    group.finish();
}

criterion_group!(
    benches,
    bench_finite_time_pdf,
    bench_longtime_cumulants,
    bench_sample_heat
);
criterion_main!(benches);
