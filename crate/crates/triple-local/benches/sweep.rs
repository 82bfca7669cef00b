//! Rayon sweep against the sequential baseline over a Steinberg grid.

use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;
use triple_local::par;
use triple_local::triple::{local_i_prime, Mode};
use triple_local::verify::{special_points, GridPoint, VerifyConfig};

fn grid() -> Vec<GridPoint> {
    let (points, _) = special_points(&VerifyConfig::default());
    points.into_iter().filter(|pt| pt.spec.m() <= 2).collect()
}

fn constant(pt: &GridPoint) -> f64 {
    local_i_prime(&pt.spec, Mode::Bruteforce).map_or(f64::NAN, |r| r.I_prime_bruteforce.map_or(f64::NAN, |v| v.re))
}

fn sweep(c: &mut Criterion) {
    let points = grid();
    let mut group = c.benchmark_group("steinberg_sweep");
    group.sample_size(10);
    group.bench_function("parallel", |b| b.iter(|| par::map(black_box(&points), constant)));
    group.bench_function("sequential", |b| b.iter(|| par::map_sequential(black_box(&points), constant)));
    group.finish();
}

criterion_group!(benches, sweep);
criterion_main!(benches);
