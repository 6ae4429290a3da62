//! Hot-path benchmarks: hierarchy right-hand side, the complex error
//! function, and a full scattering solve.

use criterion::{criterion_group, criterion_main, Criterion};
use num_complex::Complex64;
use std::hint::black_box;

use iohoem_bench::{fig_scattering, plus_state, rabi_hierarchy};
use iohoem_core::faddeeva::faddeeva_w;
use iohoem_core::markovian::solve_scattering;
use iohoem_core::operators::two_level;

fn bench_hierarchy_rhs(c: &mut Criterion) {
    let mut group = c.benchmark_group("hierarchy_rhs");
    for n_max in [8usize, 16, 24] {
        let h = rabi_hierarchy(n_max);
        let y = h.initial_state(&plus_state()).unwrap();
        let mut dydt = vec![Complex64::default(); y.len()];
        group.bench_function(format!("n_max_{n_max}_{}_adms", h.n_adm()), |b| {
            b.iter(|| {
                h.rhs(black_box(0.3), black_box(&y), &mut dydt).unwrap();
                black_box(&dydt);
            })
        });
    }
    group.finish();
}

fn bench_faddeeva(c: &mut Criterion) {
    let mut group = c.benchmark_group("faddeeva_w");
    for (label, z) in [
        ("small", Complex64::new(0.8, 0.4)),
        ("medium", Complex64::new(4.0, -2.5)),
        ("large", Complex64::new(18.0, 7.0)),
    ] {
        group.bench_function(label, |b| b.iter(|| faddeeva_w(black_box(z)).unwrap()));
    }
    group.finish();
}

fn bench_scattering_solve(c: &mut Criterion) {
    let cfg = fig_scattering(0.5, 1.5);
    let rho0 = two_level::ground();
    c.bench_function("scattering_solve_single_point", |b| {
        b.iter(|| solve_scattering(black_box(&cfg), black_box(&rho0)).unwrap())
    });
}

criterion_group!(benches, bench_hierarchy_rhs, bench_faddeeva, bench_scattering_solve);
criterion_main!(benches);
