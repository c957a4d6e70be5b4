//! Microbenchmarks for the three kernels everything else leans on: the flux
//! assembly behind every operator application, the explicit stepper's march,
//! and a full small eigensolve (continuation included).

use std::hint::black_box;
use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use trudlab_core::eigensolver::solve_extremal;
use trudlab_core::evolution::evolve;
use trudlab_core::operators::p_laplacian;
use trudlab_core::{
    DescentOptions, GridDomain, PExponent, Regularization, ScalarField, StepOptions,
};

fn interval(n: usize) -> Arc<GridDomain> {
    Arc::new(GridDomain::build_interval(0.0, 1.0, n).unwrap())
}

fn unit_square(n: usize) -> Arc<GridDomain> {
    Arc::new(GridDomain::build_masked(|_, _| true, [0.0, 1.0, 0.0, 1.0], n).unwrap())
}

fn sine_data(d: &Arc<GridDomain>) -> ScalarField {
    ScalarField::from_fn_interior(d, |x, y| {
        let pi = std::f64::consts::PI;
        if d.dim() == 1 {
            (pi * x).sin()
        } else {
            (pi * x).sin() * (pi * y).sin()
        }
    })
}

fn flux_assembly(c: &mut Criterion) {
    let mut group = c.benchmark_group("p_laplacian");
    let domains = [("interval_256", interval(256)), ("square_64", unit_square(64))];
    for (label, d) in &domains {
        let f = sine_data(d);
        for pe in [1.5, 2.0, 3.0] {
            let p = PExponent::new(pe).unwrap();
            let reg = Regularization::for_problem(p, d.h());
            group.bench_with_input(BenchmarkId::new(*label, pe), &pe, |b, _| {
                b.iter(|| p_laplacian(black_box(&f), p, reg))
            });
        }
    }
    group.finish();
}

fn explicit_stepping(c: &mut Criterion) {
    let mut group = c.benchmark_group("evolve_explicit");
    // Step size pinned under every CFL bound so each measurement marches
    // exactly t_end / dt_max steps regardless of the data.
    let cases = [(2.0, 1e-5, 1e-3), (3.0, 1e-7, 1e-5), (1.5, 1e-6, 1e-4)];
    let d = interval(128);
    let g = sine_data(&d);
    for (pe, dt_max, t_end) in cases {
        let p = PExponent::new(pe).unwrap();
        let mut opts = StepOptions::defaults(p, d.h());
        opts.dt_max = dt_max;
        opts.snapshot_stride = usize::MAX;
        group.bench_with_input(BenchmarkId::new("interval_128", pe), &pe, |b, _| {
            b.iter(|| evolve(&d, p, black_box(&g), t_end, &opts).unwrap())
        });
    }
    group.finish();
}

fn eigensolver(c: &mut Criterion) {
    let mut group = c.benchmark_group("solve_extremal");
    group.sample_size(20);
    let d = interval(32);
    let p = PExponent::new(3.0).unwrap();
    group.bench_function("interval_32_p3", |b| {
        b.iter(|| solve_extremal(black_box(&d), p, &DescentOptions::default()).unwrap())
    });
    group.finish();
}

criterion_group!(benches, flux_assembly, explicit_stepping, eigensolver);
criterion_main!(benches);
