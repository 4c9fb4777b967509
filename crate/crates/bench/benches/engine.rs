use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use finslerlab::*;

fn kropina_hopf(mode: DerivativeMode) -> MetricModel {
    kropina_from_navigation(RiemannianChart::RoundSphere { dim: 3 }, VectorField::Hopf, &[])
        .unwrap()
        .with_derivatives(mode)
}

fn modes() -> [(&'static str, DerivativeMode); 2] {
    [("exact", DerivativeMode::Exact), ("fd", DerivativeMode::Fd)]
}

// A point well inside the Hopf cone: W·y > 0 with margin.
const X: [f64; 3] = [0.2, 0.1, -0.3];
const Y: [f64; 3] = [0.4, -0.9, 0.5];

fn tensors(c: &mut Criterion) {
    let mut group = c.benchmark_group("fundamental_tensor");
    for (name, mode) in modes() {
        let model = kropina_hopf(mode);
        group.bench_function(BenchmarkId::new("kropina_hopf", name), |b| {
            b.iter(|| fundamental_tensor(&model, black_box(&X), black_box(&Y)).unwrap())
        });
    }
    let helicoid = MetricModel::helicoid_space(1.0, 1.0).unwrap();
    // Inside 4/(π²a²)·y₃² < y₁² + y₂² < y₃²/a².
    let y = [0.5, 0.2, 0.6];
    group.bench_function("helicoid_space/exact", |b| {
        b.iter(|| fundamental_tensor(&helicoid, black_box(&[0.0; 3]), black_box(&y)).unwrap())
    });
    group.finish();
}

fn curvature(c: &mut Criterion) {
    let mut group = c.benchmark_group("flag_curvature");
    group.sample_size(20);
    let v = [1.0, 0.3, -0.2];
    for (name, mode) in modes() {
        let model = kropina_hopf(mode);
        group.bench_function(BenchmarkId::new("kropina_hopf", name), |b| {
            b.iter(|| flag_curvature(&model, black_box(&X), black_box(&Y), black_box(&v)).unwrap())
        });
    }
    group.finish();
}

fn shape(c: &mut Criterion) {
    let mut group = c.benchmark_group("shape_operator");
    group.sample_size(20);
    let imm = Immersion::Helicoid { a: 1.0 };
    let options = ShapeOptions::default();
    for (name, mode) in modes() {
        let model = MetricModel::helicoid_space(1.0, 1.0).unwrap().with_derivatives(mode);
        group.bench_function(BenchmarkId::new("helicoid", name), |b| {
            b.iter(|| shape_operator(&model, &imm, black_box(&[0.5, 1.0]), &options).unwrap())
        });
    }
    let torus = Immersion::CliffordTorus { r: 0.6, s: 0.8 };
    let model = kropina_hopf(DerivativeMode::Exact);
    group.bench_function("kropina_hopf_clifford_torus/exact", |b| {
        b.iter(|| shape_operator(&model, &torus, black_box(&[0.4, 1.3]), &options).unwrap())
    });
    group.finish();
}

criterion_group!(benches, tensors, curvature, shape);
criterion_main!(benches);
