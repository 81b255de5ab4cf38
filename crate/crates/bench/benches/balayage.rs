use std::hint::black_box;

use balayage_bench::{default_family, example5, mollifier, shell_masks};
use balayage_core::construct::{convolution_balayage, harmonic_measure_ball};
use balayage_core::hull::inward_filled_hull;
use balayage_core::testfn::{point_potential, riesz_measure_grid, truncate};
use balayage_core::{check, Ball, Point, SetExpr};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn bench_check(c: &mut Criterion) {
    let mut g = c.benchmark_group("check_example5");
    for level in [16, 32, 64] {
        let ex = example5(level).unwrap();
        let fam = default_family(&[&ex.theta, &ex.mu]).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(level), &level, |b, _| {
            b.iter(|| check(black_box(&ex.theta), black_box(&ex.mu), &fam, 0.0).unwrap())
        });
    }
    g.finish();
}

fn bench_quadrature(c: &mut Criterion) {
    c.bench_function("flatten_example5_128", |b| b.iter(|| example5(black_box(128)).unwrap()));
    let ball = Ball::open(Point::origin(2), 0.5);
    let x = Point::new(&[0.3, 0.1]);
    c.bench_function("harmonic_measure_512", |b| {
        b.iter(|| harmonic_measure_ball(&ball, black_box(&x), 512).unwrap())
    });
}

fn bench_construct(c: &mut Criterion) {
    let ex = example5(32).unwrap();
    let iota = mollifier(0.05, 12).unwrap();
    let domain = SetExpr::ball(Point::origin(2), 1.0, false);
    let mut g = c.benchmark_group("construct");
    g.sample_size(10);
    g.bench_function("convolution_example5_32", |b| {
        b.iter(|| convolution_balayage(black_box(&ex.mu), &iota, &domain).unwrap())
    });
    g.finish();
}

fn bench_hull(c: &mut Criterion) {
    let mut g = c.benchmark_group("inward_filled_hull");
    for n in [64, 128, 256] {
        let (o, k) = shell_masks(1.0 / n as f64).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| inward_filled_hull(black_box(&o), &k).unwrap())
        });
    }
    g.finish();
}

fn bench_riesz(c: &mut Criterion) {
    let f = truncate(point_potential(Point::origin(2)), 20.0).unwrap();
    let (lo, hi) = (Point::new(&[-0.5, -0.5]), Point::new(&[0.5, 0.5]));
    c.bench_function("riesz_grid_h200", |b| {
        b.iter(|| riesz_measure_grid(&f, &lo, &hi, black_box(1.0 / 200.0)).unwrap())
    });
}

criterion_group!(benches, bench_check, bench_quadrature, bench_construct, bench_hull, bench_riesz);
criterion_main!(benches);
