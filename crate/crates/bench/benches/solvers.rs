use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
use std::hint::black_box;

use contractive_core::evolution::{com_evolve, uniform_grid};
use contractive_core::gaussian::apply_local_transform;
use contractive_core::grid::{entropy_numeric, GridSpec};
use contractive_core::measures::eof_of;
use contractive_core::restore::{solve_theta_r, transformed_coefficients, SolverOptions};
use contractive_core::{LocalTransform, StmsParams};
use criterion::{criterion_group, criterion_main, Criterion};

fn closed_forms(c: &mut Criterion) {
    let p = StmsParams::new(0.5, FRAC_PI_4).unwrap();
    let xf = LocalTransform::new(0.7, 0.4);
    c.bench_function("com_evolve + eof", |b| {
        b.iter(|| eof_of(&com_evolve(p, black_box(1.3)).unwrap()).unwrap())
    });
    c.bench_function("transformed_coefficients", |b| {
        b.iter(|| transformed_coefficients(p, black_box(1.3), &xf).unwrap())
    });
    let evolved = com_evolve(p, 1.3).unwrap();
    c.bench_function("apply_local_transform", |b| {
        b.iter(|| apply_local_transform(black_box(&evolved), &xf).unwrap())
    });
}

fn restoration(c: &mut Criterion) {
    let p = StmsParams::new(0.5, FRAC_PI_2).unwrap();
    let grid = uniform_grid(5.0, 500);
    c.bench_function("solve_theta_r t<=5, 501 points", |b| {
        b.iter(|| solve_theta_r(p, black_box(&grid), SolverOptions::default()).unwrap())
    });
}

fn grid_entropy(c: &mut Criterion) {
    let st = com_evolve(StmsParams::new(0.5, FRAC_PI_4).unwrap(), 1.0).unwrap();
    let spec = GridSpec::auto(&st).unwrap();
    let mut g = c.benchmark_group("grid");
    g.sample_size(10);
    g.bench_function("entropy_numeric n=400", |b| b.iter(|| entropy_numeric(black_box(&st), &spec).unwrap()));
    g.finish();
}

criterion_group!(benches, closed_forms, restoration, grid_entropy);
criterion_main!(benches);
