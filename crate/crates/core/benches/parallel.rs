//! Sequential-vs-parallel benchmarks for the data-parallel kernels:
//! spherical-function table builds, transform application, and the Hunt
//! convolution sweep. With `--no-default-features` only the sequential
//! arm exists.

use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use sphq::exponent::GangolliExponent;
use sphq::grid::{RadialGrid, SpectralGrid};
use sphq::par::ExecMode;
use sphq::semigroup::{heat_kernel, hunt_convolution};
use sphq::space::SpaceModel;
use sphq::table::PhiTable;
use sphq::transform::{gaussian_bump, SphericalTransform, TruncationPolicy};

fn modes() -> Vec<(&'static str, ExecMode)> {
    #[allow(unused_mut)]
    let mut v = vec![("seq", ExecMode::Sequential)];
    #[cfg(feature = "parallel")]
    v.push(("par", ExecMode::Parallel));
    v
}

fn bench_table_build(c: &mut Criterion) {
    let mut group = c.benchmark_group("phi_table_build_h2");
    group.sample_size(10);
    let space = SpaceModel::new(2).unwrap();
    let sgrid = SpectralGrid::composite_gl(24.0, 40, 8);
    let rgrid = RadialGrid::composite_gl(12.0, 40, 8);
    for (name, mode) in modes() {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| PhiTable::build(&space, &sgrid, &rgrid, mode).unwrap())
        });
    }
    group.finish();
}

fn bench_forward_transform(c: &mut Criterion) {
    let mut group = c.benchmark_group("forward_transform_h3");
    group.sample_size(20);
    let rgrid = RadialGrid::composite_gl(16.0, 150, 8);
    let sgrid = SpectralGrid::composite_gl(32.0, 150, 8);
    for (name, mode) in modes() {
        let t =
            SphericalTransform::with_mode(3, Arc::clone(&rgrid), Arc::clone(&sgrid), mode).unwrap();
        let f = gaussian_bump(t.rgrid(), 1.0);
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| t.forward(&f, TruncationPolicy::Strict).unwrap())
        });
    }
    group.finish();
}

fn bench_hunt_convolution(c: &mut Criterion) {
    let mut group = c.benchmark_group("hunt_convolution_h3");
    group.sample_size(10);
    let rgrid = RadialGrid::composite_gl(12.0, 60, 8);
    let sgrid = SpectralGrid::composite_gl(24.0, 60, 8);
    for (name, mode) in modes() {
        let t =
            SphericalTransform::with_mode(3, Arc::clone(&rgrid), Arc::clone(&sgrid), mode).unwrap();
        let f = gaussian_bump(t.rgrid(), 1.0);
        let h = heat_kernel(&t, 0.3).unwrap();
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| hunt_convolution(&t, &f, &h).unwrap())
        });
    }
    group.finish();
}

fn bench_evolution(c: &mut Criterion) {
    let mut group = c.benchmark_group("evolve_h3");
    group.sample_size(20);
    let rgrid = RadialGrid::composite_gl(16.0, 150, 8);
    let sgrid = SpectralGrid::composite_gl(32.0, 150, 8);
    for (name, mode) in modes() {
        let t =
            SphericalTransform::with_mode(3, Arc::clone(&rgrid), Arc::clone(&sgrid), mode).unwrap();
        let bm = GangolliExponent::brownian(t.space());
        let f = gaussian_bump(t.rgrid(), 1.0);
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| {
                sphq::semigroup::evolve(&t, &bm, &f, 0.5, TruncationPolicy::Strict).unwrap()
            })
        });
    }
    group.finish();
}

criterion_group!(
    benches,
    bench_table_build,
    bench_forward_transform,
    bench_hunt_convolution,
    bench_evolution
);
criterion_main!(benches);
