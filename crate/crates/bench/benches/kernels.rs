//! Timings of the numerical kernels: the hypergeometric function, one edge
//! period, a prevertex fit, a height evaluation and patch integration.

use criterion::{black_box, criterion_group, criterion_main, Criterion};
use orthoscherk::genus1::Domain;
use orthoscherk::height_solver::total_height;
use orthoscherk::mesh::integrate_patch;
use orthoscherk::orthodisk::{build_pair, fit_prevertices};
use orthoscherk::specfun::{hyp2f1, HypergeometricParams};
use orthoscherk::weierstrass::{genus0_data, genus1_data};
use orthoscherk::GeometricCoords;
use std::f64::consts::FRAC_PI_2;

fn hypergeometric(c: &mut Criterion) {
    let near = HypergeometricParams { a: 0.5, b: 0.5, c: 1.0, x: 0.3 };
    let far = HypergeometricParams { a: 0.5, b: 0.5, c: 1.0, x: 0.99 };
    c.bench_function("hyp2f1 x=0.3", |b| b.iter(|| hyp2f1(black_box(near)).unwrap()));
    c.bench_function("hyp2f1 x=0.99", |b| b.iter(|| hyp2f1(black_box(far)).unwrap()));
}

fn conformal(c: &mut Criterion) {
    let coords = GeometricCoords::new(2, vec![0.18], 0.54).unwrap();
    let pair = build_pair(&coords).unwrap();
    let fit = fit_prevertices(&pair, Domain::Gdh).unwrap();
    c.bench_function("edge period genus 2", |b| b.iter(|| fit.polygon.edge_period(black_box(2)).unwrap()));
    c.bench_function("prevertex fit genus 2", |b| b.iter(|| fit_prevertices(black_box(&pair), Domain::Gdh).unwrap()));
    c.bench_function("total height genus 2", |b| b.iter(|| total_height(black_box(&coords)).unwrap()));
}

fn meshing(c: &mut Criterion) {
    let square = genus0_data(FRAC_PI_2).unwrap();
    let one = genus1_data().unwrap();
    let mut group = c.benchmark_group("patch integration");
    group.sample_size(10);
    group.bench_function("genus 0 res 32", |b| b.iter(|| integrate_patch(black_box(&square), 32).unwrap()));
    group.bench_function("genus 1 res 32", |b| b.iter(|| integrate_patch(black_box(&one), 32).unwrap()));
    group.finish();
}

criterion_group!(benches, hypergeometric, conformal, meshing);
criterion_main!(benches);
