use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use num_complex::Complex64;
use qheat_bench::reference_params;
use qheat_core::floquet::{monodromy_floquet, rabi_floquet};
use qheat_core::rates::coupling_fourier;

const SIGMA_X: [[Complex64; 2]; 2] = [
    [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
    [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
];

fn bench_rabi_floquet(c: &mut Criterion) {
    let params = reference_params();
    c.bench_function("rabi_floquet", |b| {
        b.iter(|| rabi_floquet(black_box(&params)).unwrap());
    });
}

fn bench_monodromy_floquet(c: &mut Criterion) {
    let params = reference_params();
    let mut group = c.benchmark_group("monodromy_floquet");
    for grid in [128usize, 512] {
        group.bench_function(BenchmarkId::new("grid", grid), |b| {
            b.iter(|| {
                monodromy_floquet(|t| params.hamiltonian(t), params.omega_drive, grid).unwrap()
            });
        });
    }
    group.finish();
}

fn bench_coupling_fourier(c: &mut Criterion) {
    let params = reference_params();
    let sol = monodromy_floquet(|t| params.hamiltonian(t), params.omega_drive, 512).unwrap();
    c.bench_function("coupling_fourier", |b| {
        b.iter(|| coupling_fourier(black_box(&SIGMA_X), &sol, 3).unwrap());
    });
}

criterion_group!(
    benches,
    bench_rabi_floquet,
    bench_monodromy_floquet,
    bench_coupling_fourier
);
criterion_main!(benches);
