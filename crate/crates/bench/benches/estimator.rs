use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use freqbias_bench::synthetic_day;
use freqbias_core::{ols_fit, rolling_estimate, EstimatorConfig, Window};

fn single_window(c: &mut Criterion) {
    let ds = synthetic_day(1440);
    c.bench_function("ols_fit_60", |b| {
        b.iter(|| ols_fit(black_box(&ds.f), &ds.f_ref, &ds.p_g, Window::new(600, 60)).unwrap())
    });
}

fn rolling_day(c: &mut Criterion) {
    let ds = synthetic_day(1440);
    let mut group = c.benchmark_group("rolling_day");
    for window in [30usize, 60, 240] {
        let cfg = EstimatorConfig {
            window_minutes: window,
            ..EstimatorConfig::default()
        };
        group.bench_with_input(BenchmarkId::from_parameter(window), &cfg, |b, cfg| {
            b.iter(|| rolling_estimate(black_box(&ds.f), &ds.f_ref, &ds.p_g, cfg).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, single_window, rolling_day);
criterion_main!(benches);
