//! Benchmarks along the hot path: closed forms, graded mesh construction,
//! operator assembly, a dense eigensolve, and the band-mass quadrature.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use nalgebra::Vector3;

use cone_spectra::{
    alpha_of_lambda, assemble, build_mesh, lambda_of_alpha, lune_lambda1, make_cone,
    poisson_band_mass, solve, Preset, SolveOptions,
};

fn bench_closed_forms(c: &mut Criterion) {
    c.bench_function("lune_lambda1", |b| {
        b.iter(|| lune_lambda1(black_box(2.2)).unwrap())
    });
    c.bench_function("exponent_round_trip", |b| {
        b.iter(|| {
            let alpha = alpha_of_lambda(black_box(0.75), 3).unwrap();
            lambda_of_alpha(alpha, 3).unwrap()
        })
    });
}

fn bench_mesh_build(c: &mut Criterion) {
    let spec = make_cone(Preset::HalfPlane, 3, None).unwrap();
    c.bench_function("build_graded_slit_sphere_level3", |b| {
        b.iter(|| build_mesh(black_box(&spec), 3, 4).unwrap())
    });
}

fn bench_assembly(c: &mut Criterion) {
    let spec = make_cone(Preset::HalfPlane, 3, None).unwrap();
    let mesh = build_mesh(&spec, 4, 4).unwrap();
    c.bench_function("assemble_level4_slit_sphere", |b| {
        b.iter(|| assemble(black_box(&mesh)).unwrap())
    });
}

fn bench_solve(c: &mut Criterion) {
    let spec = make_cone(Preset::HalfPlane, 2, None).unwrap();
    let mesh = build_mesh(&spec, 5, 0).unwrap();
    let pair = assemble(&mesh).unwrap();
    let opts = SolveOptions {
        k: 6,
        ..SolveOptions::default()
    };
    let mut group = c.benchmark_group("solve");
    group.sample_size(20);
    group.bench_function("slit_circle_level5_k6", |b| {
        b.iter(|| solve(black_box(&pair), &opts).unwrap())
    });
    group.finish();
}

fn bench_band_mass(c: &mut Criterion) {
    let x = Vector3::new(0.3, -0.1, 0.2);
    c.bench_function("poisson_band_mass", |b| {
        b.iter(|| poisson_band_mass(black_box(&x), 1.0, 0.05).unwrap())
    });
}

criterion_group!(
    benches,
    bench_closed_forms,
    bench_mesh_build,
    bench_assembly,
    bench_solve,
    bench_band_mass
);
criterion_main!(benches);
